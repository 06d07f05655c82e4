#include "lietoda/mappings.hpp"

#include <cmath>

namespace lietoda {

std::string map_kind_name(MapKind k) {
  switch (k) {
    case MapKind::utoda11: return "utoda11";
    case MapKind::darboux_toda: return "dt";
    case MapKind::utoda12: return "utoda12";
  }
  return "?";
}

MapKind parse_map_kind(const std::string& s) {
  if (s == "utoda11") return MapKind::utoda11;
  if (s == "dt" || s == "darboux_toda") return MapKind::darboux_toda;
  if (s == "utoda12") return MapKind::utoda12;
  throw ConfigError("unknown map kind '" + s + "' (expected utoda11, dt or utoda12)");
}

int map_arity(MapKind k) { return k == MapKind::utoda12 ? 4 : 2; }

MappingState make_state(MapKind k, const Grid2D& g, std::vector<Field2D> fields) {
  if (static_cast<int>(fields.size()) != map_arity(k))
    throw std::invalid_argument(map_kind_name(k) + " state needs " + std::to_string(map_arity(k)) + " fields");
  for (const auto& f : fields)
    if (f.nx != g.Nx || f.ny != g.Ny) throw std::invalid_argument("state fields do not match the grid");
  MappingState s;
  s.kind = k;
  s.grid = g;
  s.fields = std::move(fields);
  return s;
}

namespace {

bool interior(const MappingState& s, int ix, int iy) {
  return ix >= s.ring && ix < s.grid.Nx - s.ring && iy >= s.ring && iy < s.grid.Ny - s.ring;
}

// strictly positive on the valid region, otherwise a branch error
void require_positive(const MappingState& s, const Field2D& f, const std::string& what) {
  std::vector<std::array<int, 2>> bad;
  for (int ix = 0; ix < f.nx; ++ix)
    for (int iy = 0; iy < f.ny; ++iy)
      if (interior(s, ix, iy) && !(f(ix, iy) > 0.0)) bad.push_back({ix, iy});
  if (!bad.empty())
    throw SingularMapping(map_kind_name(s.kind) + ": " + what + " is not positive at " + std::to_string(bad.size()) +
                              " nodes (first at ix=" + std::to_string(bad[0][0]) + ", iy=" + std::to_string(bad[0][1]) +
                              ")",
                          bad);
}

void require_nonvanishing(const MappingState& s, const Field2D& f, const std::string& what) {
  std::vector<std::array<int, 2>> bad;
  int sign = 0;
  for (int ix = 0; ix < f.nx; ++ix)
    for (int iy = 0; iy < f.ny; ++iy) {
      if (!interior(s, ix, iy)) continue;
      double v = f(ix, iy);
      if (!std::isfinite(v)) continue;
      int sg = v > 0 ? 1 : (v < 0 ? -1 : 0);
      if (sign == 0) sign = sg;
      if (sg == 0 || sg != sign) bad.push_back({ix, iy});
    }
  if (!bad.empty())
    throw SingularMapping(map_kind_name(s.kind) + ": " + what + " crosses zero at " + std::to_string(bad.size()) +
                              " nodes (first at ix=" + std::to_string(bad[0][0]) + ", iy=" + std::to_string(bad[0][1]) +
                              ")",
                          bad);
}

Field2D lnxy(const Field2D& f, const Grid2D& g) {
  return mixed_second_derivative(f.map([](double v) { return v > 0 ? std::log(v) : kNaN; }), g);
}

MappingState next(const MappingState& s, std::vector<Field2D> f) {
  MappingState r = s;
  r.ring = s.ring + kStencilRing;
  r.applications = s.applications + 1;
  for (auto& x : f)
    for (int ix = 0; ix < x.nx; ++ix)
      for (int iy = 0; iy < x.ny; ++iy)
        if (!interior(r, ix, iy)) x(ix, iy) = kNaN;
  r.fields = std::move(f);
  return r;
}

}  // namespace

MappingState utoda11_map(const MappingState& s) {
  if (s.kind != MapKind::utoda11) throw std::invalid_argument("utoda11_map: wrong state kind");
  const Field2D &p1 = s.fields[0], &p2 = s.fields[1];
  require_positive(s, p1, "phi1");
  Field2D t1 = lnxy(p1, s.grid) + 2.0 * p1 - p2;
  return next(s, {t1, p1});
}

MappingState darboux_toda_map(const MappingState& s) {
  if (s.kind != MapKind::darboux_toda) throw std::invalid_argument("darboux_toda_map: wrong state kind");
  const Field2D &u = s.fields[0], &v = s.fields[1];
  require_positive(s, v, "v");
  Field2D ut = v.map([](double x) { return 1.0 / x; });
  Field2D vt = v * (u * v + lnxy(v, s.grid));
  return next(s, {ut, vt});
}

MappingState utoda12_map(const MappingState& s) {
  if (s.kind != MapKind::utoda12) throw std::invalid_argument("utoda12_map: wrong state kind");
  const Field2D &p1 = s.fields[0], &p2 = s.fields[1], &p3 = s.fields[2], &p4 = s.fields[3];
  require_positive(s, p1, "phi1");
  Field2D t4 = p3;
  Field2D t2 = p1;
  Field2D t1 = p2 + diff_y(p3, s.grid.hy);
  MappingState probe = s;
  probe.ring = s.ring + kStencilRing;
  require_nonvanishing(probe, t1, "updated phi1");
  Field2D t3 = (lnxy(p1, s.grid) - p2 * p4 + 2.0 * (p1 * p3)) / t1;
  return next(s, {t1, t2, t3, t4});
}

MappingState apply_map(const MappingState& s, int iterations) {
  MappingState r = s;
  for (int k = 0; k < iterations; ++k) {
    switch (r.kind) {
      case MapKind::utoda11: r = utoda11_map(r); break;
      case MapKind::darboux_toda: r = darboux_toda_map(r); break;
      case MapKind::utoda12: r = utoda12_map(r); break;
    }
  }
  return r;
}

MappingState utoda11_chain(const TauField& T, int i) {
  return make_state(MapKind::utoda11, T.grid, {T.theta(i), T.theta(i - 1)});
}

MappingState darboux_toda_chain(const TauField& T, int i) {
  return make_state(MapKind::darboux_toda, T.grid, {T.tau(i - 1) / T.tau(i), T.tau(i + 1) / T.tau(i)});
}

MappingState utoda12_chain(const TauField& T, const PFields& P, int i) {
  if (P.m1 != 2 || P.m2 != 1) throw ContractError("utoda12_chain: needs p fields of a (2,1) kernel");
  return make_state(MapKind::utoda12, T.grid, {T.theta(i), T.theta(i - 1), P.p(1, i), P.p(1, i - 1)});
}

ResidualReport compare_states(const std::string& name, const MappingState& a, const MappingState& b, double tol) {
  if (a.kind != b.kind || a.fields.size() != b.fields.size())
    throw std::invalid_argument("compare_states: different state kinds");
  const int ring = std::max({a.ring, b.ring, kStencilRing});
  std::vector<ResidualReport> parts;
  for (size_t k = 0; k < a.fields.size(); ++k)
    parts.push_back(make_report("phi" + std::to_string(k + 1), a.fields[k] - b.fields[k], tol, ring));
  ResidualReport r = combine(name, parts, tol);
  r.meta["ring"] = ring;
  r.meta["applications"] = std::max(a.applications, b.applications);
  return r;
}

namespace {

SpaceTimeField time_derivative(const SpaceTimeField& f) {
  SpaceTimeField d = f;
  const int Nt = f.Nt();
  std::vector<double> series(Nt);
  for (int ix = 0; ix < f.grid.Nx; ++ix)
    for (int iy = 0; iy < f.grid.Ny; ++iy) {
      for (int it = 0; it < Nt; ++it) series[it] = f.slices[it](ix, iy);
      auto ds = diff_1d(series, f.ht);
      for (int it = 0; it < Nt; ++it) d.slices[it](ix, iy) = ds[it];
    }
  return d;
}

// w = (u_t - u_yy)/(2u), zero where u vanishes identically
Field2D w_field(const Field2D& u, const Field2D& ut, const Field2D& uyy) {
  Field2D w(u.nx, u.ny);
  for (size_t k = 0; k < u.v.size(); ++k) {
    double num = ut.v[k] - uyy.v[k];
    w.v[k] = u.v[k] == 0.0 ? (num == 0.0 ? 0.0 : kNaN) : num / (2.0 * u.v[k]);
  }
  return w;
}

}  // namespace

ResidualReport ds_residual(const SpaceTimeField& u, const SpaceTimeField& v, double tol, bool nonlocal) {
  if (u.Nt() != v.Nt() || u.Nt() < 5) throw std::invalid_argument("ds_residual: need at least 5 matching time slices");
  const Grid2D& g = u.grid;
  SpaceTimeField ut = time_derivative(u), vt = time_derivative(v);
  ResidualAccumulator a1(nonlocal ? "u_equation" : "w_x-(uv)_y", tol), a2("v_equation", tol);
  const int ring = kStencilRing;
  for (int it = ring; it < u.Nt() - ring; ++it) {
    const Field2D &U = u.slices[it], &V = v.slices[it];
    Field2D uyy = diff_yy(U, g.hy), vyy = diff_yy(V, g.hy);
    Field2D w = w_field(U, ut.slices[it], uyy);
    Field2D r1(g), r2(g);
    if (!nonlocal) {
      r1 = diff_x(w, g.hx) - diff_y(U * V, g.hy);
      r2 = vt.slices[it] + vyy + 2.0 * (V * w);
    } else {
      // W = integral in x of (uv)_y from the first valid column; constant from the u equation there
      Field2D src = diff_y(U * V, g.hy);
      Field2D W(g, kNaN);
      for (int iy = 0; iy < g.Ny; ++iy) {
        int k0 = 0;
        while (k0 < g.Nx && !(std::isfinite(src(k0, iy)) && std::isfinite(w(k0, iy)))) ++k0;
        int k1 = k0;
        while (k1 < g.Nx && std::isfinite(src(k1, iy))) ++k1;
        if (k1 - k0 < 4) continue;
        std::vector<double> row;
        for (int ix = k0; ix < k1; ++ix) row.push_back(src(ix, iy));
        auto F = cumulative_integral(row, g.hx, 0);
        for (int ix = k0; ix < k1; ++ix) W(ix, iy) = F[ix - k0] + w(k0, iy);
      }
      r1 = -1.0 * ut.slices[it] + uyy + 2.0 * (U * W);
      r2 = vt.slices[it] + vyy + 2.0 * (V * W);
    }
    for (int ix = ring; ix < g.Nx - ring; ++ix)
      for (int iy = ring; iy < g.Ny - ring; ++iy) {
        a1.add(r1(ix, iy), {ix, iy, it});
        a2.add(r2(ix, iy), {ix, iy, it});
      }
  }
  ResidualReport r = combine(nonlocal ? "ds_nonlocal" : "ds_local", {a1.report(), a2.report()}, tol);
  return r;
}

DSResidual ds_invariance_check(const SpaceTimeField& u, const SpaceTimeField& v, double tol, double mapped_tol) {
  DSResidual out;
  out.local = ds_residual(u, v, tol, false);
  out.nonlocal = ds_residual(u, v, tol, true);
  SpaceTimeField um = u, vm = v;
  for (int it = 0; it < u.Nt(); ++it) {
    MappingState s = make_state(MapKind::darboux_toda, u.grid, {u.slices[it], v.slices[it]});
    MappingState m = darboux_toda_map(s);
    um.slices[it] = m.fields[0];
    vm.slices[it] = m.fields[1];
  }
  out.mapped = ds_residual(um, vm, mapped_tol, false);
  out.mapped.name = "ds_mapped";
  return out;
}

}  // namespace lietoda
