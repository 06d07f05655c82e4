#include "lietoda/pipelines.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace lietoda {

namespace {

using json = nlohmann::json;

double tol_or(const RunConfig& c, double def) { return c.tol.value_or(def); }

// the requested tasks, or the defaults; anything outside `allowed` is a config error
std::vector<std::string> tasks_for(const RunConfig& c, const std::string& cmd, std::vector<std::string> defaults,
                                   const std::set<std::string>& allowed) {
  if (c.tasks.empty()) return defaults;
  for (size_t k = 0; k < c.tasks.size(); ++k)
    if (!allowed.count(c.tasks[k]))
      throw ConfigPathError("/tasks/" + std::to_string(k), "task '" + c.tasks[k] + "' does not apply to " + cmd);
  return c.tasks;
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

const Grid2D& need_grid(const RunConfig& c) {
  if (!c.grid) throw ConfigPathError("/grid", "missing required key");
  return *c.grid;
}

void need_algebra(const RunConfig& c) {
  if (c.n == 0) throw ConfigPathError("/algebra/n", "missing required key");
}

std::string csv_of(const Grid2D& g, const std::vector<std::pair<int, const Field2D*>>& f) {
  std::ostringstream os;
  write_field_csv(os, g, f);
  return os.str();
}

TauField tau_for(const RunConfig& c, const KernelField& K, int depth) {
  return compute_tau(K, depth, c.derivatives, c.jobs);
}

void note_singular(PipelineOutput& out, const TauField& T) {
  out.singular.insert(out.singular.end(), T.singular_nodes.begin(), T.singular_nodes.end());
}

ResidualReport scalar_report(const std::string& name, double value, double tol) {
  ResidualAccumulator acc(name, tol);
  acc.add(value, {});
  return acc.report();
}

}  // namespace

bool PipelineOutput::pass() const {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

FlowSetup flow_setup(const RunConfig& c) {
  need_algebra(c);
  FlowSetup s;
  s.n = c.n;
  s.grid = need_grid(c);
  s.minus = GradedLagrangian::standard(Side::minus, c.n, c.m1);
  s.plus = GradedLagrangian::standard(Side::plus, c.n, c.m2);
  for (const auto& k : c.coefficients) {
    GradedLagrangian& L = k.side == Side::minus ? s.minus : s.plus;
    if (k.fn.is_constant(0.0)) L.clear_coefficient(k.grade, k.site);
    else L.set(k.grade, k.site, k.fn);
  }
  const Grid2D& g = s.grid;
  switch (c.anchor) {
    case Anchor::center:
      s.origin_x = g.x0 + g.hx * (g.Nx - 1) / 2.0;
      s.origin_y = g.y0 + g.hy * (g.Ny - 1) / 2.0;
      break;
    case Anchor::corner:
      s.origin_x = g.x0;
      s.origin_y = g.y0;
      break;
    case Anchor::point:
      s.origin_x = c.anchor_x;
      s.origin_y = c.anchor_y;
      break;
  }
  s.substeps = c.substeps;
  s.with_derivatives = c.derivatives == DerivativeMode::exact;
  return s;
}

PipelineOutput run_verify_algebra(Series series, int max_rank) {
  PipelineOutput out;
  if (max_rank < 1) throw ConfigPathError("/identities/max_rank", "must be at least 1");
  if (series != Series::A) {
    // Cartan data only
    const std::vector<int> ranks = series == Series::G2 ? std::vector<int>{2} : [&] {
      std::vector<int> r;
      for (int k = series == Series::D ? 4 : 2; k <= std::max(max_rank, series == Series::D ? 4 : 2); ++k)
        r.push_back(k);
      return r;
    }();
    for (int r : ranks) {
      CartanMatrix K = cartan_matrix(series, r);
      RMatrix P = to_rmatrix(K) * cartan_inverse(K) - RMatrix::identity(r);
      out.reports.push_back(scalar_report("cartan_inverse[" + series_name(series) + ",r=" + std::to_string(r) + "]",
                                          P.max_abs(), 0.0));
    }
    return out;
  }
  for (int n = 1; n <= max_rank; ++n)
    for (int j = 1; j <= n; ++j) {
      FundamentalRep rep = fundamental_rep(n, j);
      ChevalleyResidual ch = verify_chevalley(rep);
      ResidualReport r = scalar_report("chevalley[n=" + std::to_string(n) + ",j=" + std::to_string(j) + "]",
                                       ch.value(), 0.0);
      r.meta["exact"] = to_string(ch.max_abs);
      r.meta["dim"] = rep.dim;
      if (!ch.worst.empty()) r.meta["worst"] = ch.worst;
      out.reports.push_back(r);
      // principal grading: [H, X+-_i] = +-X+-_i and tr H = 0
      RMatrix H = principal_grading(rep);
      Rational worst = 0, tr = 0;
      for (int i = 1; i <= n; ++i) {
        for (const auto& d : {commutator(H, rep.e(i)) - rep.e(i), commutator(H, rep.f(i)) + rep.f(i)})
          for (int a = 0; a < d.rows(); ++a)
            for (int b = 0; b < d.cols(); ++b) worst = std::max(worst, Rational(abs(d(a, b))));
      }
      for (int a = 0; a < H.rows(); ++a) tr += H(a, a);
      worst = std::max(worst, Rational(abs(tr)));
      ResidualReport g = scalar_report("principal_grading[n=" + std::to_string(n) + ",j=" + std::to_string(j) + "]",
                                       worst.convert_to<double>(), 0.0);
      g.meta["exact"] = to_string(worst);
      out.reports.push_back(g);
    }
  return out;
}

PipelineOutput run_verify_identities(const RunConfig& c) {
  PipelineOutput out;
  SweepSettings s;
  s.max_rank = c.max_rank;
  s.samples = c.samples;
  s.seed = c.seed;
  s.tol = tol_or(c, 1e-9);
  s.jobs = c.jobs;
  out.reports = jacobi_sweep(s);
  // recurrence on A_3 and A_4 interior sites, a = b = 1..2
  for (int n : {3, 4}) {
    if (n > c.max_rank) break;
    ResidualAccumulator acc("recurrence[n=" + std::to_string(n) + "]", s.tol);
    for (int m = 0; m < std::min(c.samples, 20); ++m) {
      auto g = random_group_element(n, c.seed * 7777ULL + static_cast<std::uint64_t>(m));
      for (int sign : {+1, -1})
        for (int i = 2; i < n; ++i)
          for (int a = 1; a <= 2; ++a)
            for (int b = 1; b <= 2; ++b) {
              try {
                auto r = recurrence_residual(g.G, n, i, a, b, sign, s.tol);
                acc.add(r.max_abs, {m, sign, i, a, b});
              } catch (const SingularConfiguration&) {
                acc.skip();
              }
            }
    }
    out.reports.push_back(acc.report());
  }
  return out;
}

PipelineOutput run_toda(const RunConfig& c) {
  const auto tasks =
      tasks_for(c, "toda", {"toda", "determinant"}, {"toda", "closed_form", "determinant", "dump"});
  PipelineOutput out;
  FlowSetup s = flow_setup(c);
  KernelField K = build_kernel(s);
  TauField T = tau_for(c, K, 1);
  note_singular(out, T);
  if (has(tasks, "toda")) out.reports.push_back(toda_residual(T, s.minus, s.plus, tol_or(c, 1e-6)));
  if (has(tasks, "closed_form")) {
    if (c.n != 1) throw ConfigPathError("/algebra/n", "the closed_form task needs A_1");
    Field2D d(s.grid);
    const Grid2D& g = s.grid;
    for (int ix = 0; ix < g.Nx; ++ix)
      for (int iy = 0; iy < g.Ny; ++iy) d(ix, iy) = T.tau(1)(ix, iy) - (1.0 + g.x(ix) * g.y(iy));
    out.reports.push_back(make_report("closed_form[1+xy]", d, tol_or(c, 1e-10), 0));
  }
  if (has(tasks, "determinant")) {
    Field2D d(s.grid);
    for (int ix = 0; ix < s.grid.Nx; ++ix)
      for (int iy = 0; iy < s.grid.Ny; ++iy) d(ix, iy) = K.at(ix, iy).determinant() - 1.0;
    out.reports.push_back(make_report("det_K", d, tol_or(c, 1e-9), 0));
  }
  if (has(tasks, "dump")) {
    std::vector<std::pair<int, const Field2D*>> tau, theta;
    for (int i = 1; i <= c.n; ++i) {
      tau.push_back({i, &T.tau(i)});
      theta.push_back({i, &T.theta(i)});
    }
    out.files.push_back({"tau.csv", csv_of(s.grid, tau)});
    out.files.push_back({"theta.csv", csv_of(s.grid, theta)});
  }
  return out;
}

PipelineOutput run_utoda(const RunConfig& c) {
  const bool base = c.m1 == 1 && c.m2 == 1;
  std::vector<std::string> defaults = {"utoda", "alpha_derivatives"};
  if (base) defaults.push_back("reduction");
  const auto tasks = tasks_for(c, "utoda", defaults, {"utoda", "alpha_derivatives", "reduction", "dump"});
  PipelineOutput out;
  FlowSetup s = flow_setup(c);
  KernelField K = build_kernel(s);
  const int depth = std::max(c.m1, c.m2);
  TauField T = tau_for(c, K, depth);
  note_singular(out, T);
  PFields P = compute_p(T, s.minus, s.plus);
  if (has(tasks, "utoda")) {
    ResidualReport r = utoda_residual(T, P, tol_or(c, 1e-6));
    r.name = "utoda[" + std::to_string(c.m1) + "," + std::to_string(c.m2) + "]";
    out.reports.push_back(r);
  }
  if (has(tasks, "alpha_derivatives")) out.reports.push_back(alpha_derivative_residual(T, P, depth, tol_or(c, 1e-5)));
  if (has(tasks, "reduction")) {
    if (!base) throw ConfigPathError("/tasks", "the reduction task needs m1 = m2 = 1");
    if (!s.minus.grade_is_constant(1, 1.0) || !s.plus.grade_is_constant(1, 1.0))
      throw ConfigPathError("/coefficients", "the reduction task needs every grade-1 coefficient equal to 1");
    ResidualFields a = utoda_fields(T, P), b = toda_fields(T);
    // UToda(1,1) has the mixed family only; the first-order families are identically zero
    ResidualFields am;
    for (auto& f : a)
      if (f.name.rfind("mixed", 0) == 0) am.push_back(f);
    double d = max_field_difference(am, b);
    double rest = 0.0;
    for (auto& f : a)
      if (f.name.rfind("mixed", 0) != 0)
        for (double v : f.field.v)
          if (std::isfinite(v)) rest = std::max(rest, std::abs(v));
    ResidualReport r = scalar_report("reduction[utoda(1,1)=toda]", std::max(d, rest), tol_or(c, 1e-12));
    r.meta["mixed_vs_toda"] = d;
    r.meta["first_order_families"] = rest;
    out.reports.push_back(r);
  }
  if (has(tasks, "dump")) {
    std::vector<std::pair<int, const Field2D*>> p, pb;
    for (int i = 1; i <= c.n; ++i) {
      p.push_back({i, &P.p(1, i)});
      pb.push_back({i, &P.pbar(1, i)});
    }
    out.files.push_back({"p1.csv", csv_of(s.grid, p)});
    out.files.push_back({"pbar1.csv", csv_of(s.grid, pb)});
  }
  return out;
}

PipelineOutput run_gtoda(const RunConfig& c) {
  if (c.m1 != 2 || c.m2 != 2) throw ConfigPathError(c.m1 != 2 ? "/m1" : "/m2", "gtoda needs m1 = m2 = 2");
  PipelineOutput out;
  FlowSetup s = flow_setup(c);
  bool all_one = true;
  for (const auto* L : {&s.minus, &s.plus})
    for (int i = 1; i < c.n; ++i) {
      const CoeffFn* f = L->find(2, i);
      if (!f || !f->is_constant(1.0)) all_one = false;
    }
  std::vector<std::string> defaults = {"gtoda"};
  if (all_one) defaults.push_back("compare_utoda");
  const auto tasks = tasks_for(c, "gtoda", defaults, {"gtoda", "compare_utoda"});
  KernelField K = build_kernel(s);
  TauField T = tau_for(c, K, 2);
  note_singular(out, T);
  const CartanMatrix C = cartan_matrix(Series::A, c.n);
  if (has(tasks, "gtoda")) out.reports.push_back(gtoda_residual(C, T, s.minus, s.plus, tol_or(c, 1e-5)));
  if (has(tasks, "compare_utoda")) {
    if (!all_one) throw ConfigPathError("/coefficients", "compare_utoda needs every grade-2 coefficient equal to 1");
    GTodaFields G = gtoda_fields(C, T, s.minus, s.plus);
    PFields P = compute_p(T, s.minus, s.plus);
    ResidualFields U = utoda_fields(T, P);
    ResidualFields a, b;
    for (int i = 1; i <= c.n; ++i) {
      const std::string tag = "[" + std::to_string(i) + "]", rt = "[r=1,i=" + std::to_string(i) + "]";
      a.push_back({"p1" + tag, G.p1[i - 1]});
      b.push_back({"p1" + tag, P.p(1, i)});
      a.push_back({"pbar1" + tag, G.pbar1[i - 1]});
      b.push_back({"pbar1" + tag, P.pbar(1, i)});
      for (const auto& g : G.residuals) {
        if (g.name == "mixed" + tag) a.push_back(g);
        if (g.name == "p_y" + tag) a.push_back({"p_y" + rt, g.field});
        if (g.name == "pbar_x" + tag) a.push_back({"pbar_x" + rt, g.field});
      }
      for (const auto& u : U)
        if (u.name == "mixed" + tag || u.name == "p_y" + rt || u.name == "pbar_x" + rt) b.push_back(u);
    }
    auto by_name = [](const NamedField& x, const NamedField& y) { return x.name < y.name; };
    std::sort(a.begin(), a.end(), by_name);
    std::sort(b.begin(), b.end(), by_name);
    ResidualReport r = scalar_report("gtoda_vs_utoda[2,2]", max_field_difference(a, b), tol_or(c, 1e-12));
    r.meta["fields"] = a.size();
    out.reports.push_back(r);
  }
  return out;
}

PipelineOutput run_map_oracle(const RunConfig& c) {
  if (!c.map) throw ConfigPathError("/map", "missing required key");
  const MapSpec& m = *c.map;
  const bool twelve = m.kind == MapKind::utoda12;
  if (twelve ? (c.m1 != 2 || c.m2 != 1) : (c.m1 != 1 || c.m2 != 1))
    throw ConfigPathError("/m1", twelve ? "the utoda12 oracle needs m1 = 2, m2 = 1" : "this map needs m1 = m2 = 1");
  need_algebra(c);
  const int lo = m.kind == MapKind::darboux_toda ? 1 : 2;
  if (m.site < lo || m.site + 1 > c.n)
    throw ConfigPathError("/map/site", "needs " + std::to_string(lo) + " <= site <= n-1");
  std::vector<std::string> defaults = {"shift"};
  if (m.site + 2 <= c.n) defaults.push_back("twofold");
  const auto tasks = tasks_for(c, "map", defaults, {"shift", "twofold"});
  if (has(tasks, "twofold") && m.site + 2 > c.n) throw ConfigPathError("/map/site", "twofold needs site <= n-2");
  PipelineOutput out;
  FlowSetup s = flow_setup(c);
  KernelField K = build_kernel(s);
  TauField T = tau_for(c, K, std::max(c.m1, c.m2));
  note_singular(out, T);
  PFields P = compute_p(T, s.minus, s.plus);
  auto chain = [&](int i) {
    switch (m.kind) {
      case MapKind::utoda11: return utoda11_chain(T, i);
      case MapKind::darboux_toda: return darboux_toda_chain(T, i);
      case MapKind::utoda12: return utoda12_chain(T, P, i);
    }
    return utoda11_chain(T, i);
  };
  const MappingState src = chain(m.site);
  const std::string kind = map_kind_name(m.kind), at = "[site=" + std::to_string(m.site);
  if (has(tasks, "shift"))
    out.reports.push_back(compare_states(kind + "_shift" + at + "]", apply_map(src, 1), chain(m.site + 1),
                                         tol_or(c, 1e-5)));
  if (has(tasks, "twofold"))
    out.reports.push_back(compare_states(kind + "_twofold" + at + "]", apply_map(src, 2), chain(m.site + 2),
                                         tol_or(c, 1e-4)));
  return out;
}

void write_spacetime_csv(std::ostream& os, const std::vector<std::pair<int, const SpaceTimeField*>>& fields) {
  os << "site,ix,iy,x,y,tbar,value\n";
  char buf[160];
  for (const auto& [site, f] : fields)
    for (int it = 0; it < f->Nt(); ++it)
      for (int ix = 0; ix < f->grid.Nx; ++ix)
        for (int iy = 0; iy < f->grid.Ny; ++iy) {
          // DS time t = -tbar
          std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n", site, ix, iy, f->grid.x(ix),
                        f->grid.y(iy), -f->t(it), f->slices[it](ix, iy));
          os << buf;
        }
}

PipelineOutput run_soliton(const RunConfig& c) {
  std::vector<std::string> defaults = {"linear_eq", "frobenius", "chain", "time_tau", "frozen_toda"};
  if (c.ds) defaults.push_back("ds");
  const auto tasks = tasks_for(c, "soliton", defaults,
                               {"linear_eq", "frobenius", "chain", "time_tau", "frozen_toda", "ds", "dump"});
  PipelineOutput out;
  const WronskianFrame f = c.frame ? *c.frame : WronskianFrame::default_frame(2);
  Grid2D yt;
  if (c.chain_grid) {
    yt = *c.chain_grid;
  } else {
    yt.x0 = -1.0;
    yt.hx = f.k >= 3 ? 0.005 : 0.01;
    yt.Nx = f.k >= 3 ? 401 : 201;
    yt.y0 = -1.0;
    yt.hy = 0.1;
    yt.Ny = 21;
  }
  if (has(tasks, "linear_eq")) out.reports.push_back(linear_eq_residual(f, yt, tol_or(c, 1e-10)));
  if (has(tasks, "frobenius")) {
    FrobeniusResult fr = frobenius_factors(f, yt.y(yt.Ny / 2), yt.x0, yt.hx, yt.Nx);
    ResidualReport r = scalar_report("frobenius_roundtrip[k=" + std::to_string(f.k) + "]", fr.roundtrip_error,
                                     tol_or(c, 1e-7));
    r.meta["factors"] = fr.phi.size();
    out.reports.push_back(r);
  }
  if (has(tasks, "chain")) out.reports.push_back(nilpotent_chain_residual(f, yt, tol_or(c, f.k == 2 ? 1e-7 : 1e-6)));
  const int n = f.size() - 1;
  const Grid2D g = c.grid ? *c.grid : Grid2D::centered();
  if ((has(tasks, "time_tau") || has(tasks, "frozen_toda")) && n < 1)
    throw ConfigPathError("/frame/modes", "a kernel needs at least two modes");
  if (has(tasks, "time_tau")) {
    TimeTauSetup ts;
    ts.frame = f;
    ts.n = n;
    ts.grid = g;
    ts.fixed = c.time_fixed;
    ts.time_side = c.time_side;
    ts.mode = c.derivatives;
    ts.substeps = c.substeps;
    TimeTauResult R = time_dependent_tau(ts);
    note_singular(out, R.tau);
    out.reports.push_back(R.pipeline);
    ResidualReport r = c.time_side == Side::plus ? utoda_k1_residual(R.tau, R.p, f.k, tol_or(c, 1e-5))
                                                 : utoda_residual(R.tau, R.p, tol_or(c, 1e-5));
    if (c.time_side == Side::minus) r.name = "utoda_1k[k=" + std::to_string(f.k) + ",mirrored]";
    r.meta["min_minor"] = R.min_minor;
    r.meta["positive_minors"] = R.min_minor > 0;
    out.reports.push_back(r);
  }
  if (has(tasks, "frozen_toda")) {
    KernelField K = frozen_time_kernel(f, g, c.time_fixed, c.derivatives == DerivativeMode::exact);
    TauField T = compute_tau(K, 1, c.derivatives, c.jobs);
    note_singular(out, T);
    ResidualReport r = toda_residual(T, K.minus, K.plus, tol_or(c, 1e-6));
    r.name = "frozen_time_toda";
    out.reports.push_back(r);
  }
  if (has(tasks, "ds") || (has(tasks, "dump") && c.ds)) {
    if (!c.ds) throw ConfigPathError("/ds", "missing required key");
    const DSSpec& d = *c.ds;
    DSSoliton sol = ds_soliton(d.frame, d.site);
    auto [u, v] = sample_ds(sol, d.grid, d.t0, d.ht, d.Nt);
    if (has(tasks, "ds")) {
      DSResidual r = ds_invariance_check(u, v, tol_or(c, 1e-4), c.tol.value_or(1e-3));
      out.reports.push_back(r.local);
      out.reports.push_back(r.nonlocal);
      out.reports.push_back(r.mapped);
    }
    if (has(tasks, "dump")) {
      std::ostringstream os;
      write_spacetime_csv(os, {{1, &u}, {2, &v}});
      out.files.push_back({"ds_uv.csv", os.str()});
    }
  }
  return out;
}

PipelineOutput run_command(const std::string& cmd, const RunConfig& c) {
  if (cmd == "toda") return run_toda(c);
  if (cmd == "utoda") return run_utoda(c);
  if (cmd == "gtoda") return run_gtoda(c);
  if (cmd == "map") return run_map_oracle(c);
  if (cmd == "soliton") return run_soliton(c);
  if (cmd == "verify-identities") return run_verify_identities(c);
  throw std::invalid_argument("unknown command '" + cmd + "'");
}

}  // namespace lietoda
