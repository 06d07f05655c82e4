#include "lietoda/config.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace lietoda {

std::string tool_version() { return LIETODA_VERSION; }

namespace {

using json = nlohmann::json;

std::string child(const std::string& ptr, const std::string& key) {
  std::string k;
  for (char c : key) {
    if (c == '~') k += "~0";
    else if (c == '/') k += "~1";
    else k += c;
  }
  return ptr + "/" + k;
}

std::string child(const std::string& ptr, size_t idx) { return ptr + "/" + std::to_string(idx); }

// typed access with pointer diagnostics
class View {
 public:
  View(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) throw ConfigPathError(ptr_, "expected an object");
  }
  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) throw ConfigPathError(child(ptr_, it.key()), "unknown key");
  }
  bool has(const char* k) const { return j_.contains(k); }
  const json& at(const char* k) const {
    if (!j_.contains(k)) throw ConfigPathError(child(ptr_, k), "missing required key");
    return j_.at(k);
  }
  std::string path(const char* k) const { return child(ptr_, k); }

  int integer(const char* k, std::optional<int> def = {}, int lo = std::numeric_limits<int>::min()) const {
    if (!has(k)) {
      if (def) return *def;
      at(k);
    }
    const json& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigPathError(path(k), "expected an integer");
    long long x = v.get<long long>();
    if (x < lo || x > std::numeric_limits<int>::max())
      throw ConfigPathError(path(k), "must be at least " + std::to_string(lo));
    return static_cast<int>(x);
  }
  double number(const char* k, std::optional<double> def = {}) const {
    if (!has(k)) {
      if (def) return *def;
      at(k);
    }
    const json& v = j_.at(k);
    if (!v.is_number()) throw ConfigPathError(path(k), "expected a number");
    return v.get<double>();
  }
  std::string string(const char* k, std::optional<std::string> def = {}) const {
    if (!has(k)) {
      if (def) return *def;
      at(k);
    }
    const json& v = j_.at(k);
    if (!v.is_string()) throw ConfigPathError(path(k), "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string ptr_;
};

WronskianFrame frame_at(const json& j, const std::string& ptr) {
  try {
    return WronskianFrame::from_json(j);
  } catch (const ConfigError& e) {
    std::string m = e.what();
    // messages look like "frame/<key>: ..." or "frame: ..."
    if (m.rfind("frame/", 0) == 0) {
      auto colon = m.find(':');
      throw ConfigPathError(ptr + m.substr(5, colon - 5), m.substr(colon + 2));
    }
    if (m.rfind("frame: ", 0) == 0) throw ConfigPathError(ptr, m.substr(7));
    throw ConfigPathError(ptr, m);
  }
}

json coeff_json(const CoefficientSpec& c) {
  json j = c.fn.to_json();
  j["side"] = side_name(c.side);
  j["grade"] = c.grade;
  j["site"] = c.site;
  return j;
}

const std::set<std::string>& known_tasks() {
  static const std::set<std::string> t = {"toda", "closed_form", "determinant", "dump", "utoda", "alpha_derivatives",
                                          "reduction", "gtoda", "compare_utoda", "shift", "twofold", "linear_eq",
                                          "frobenius", "chain", "time_tau", "frozen_toda", "ds"};
  return t;
}

}  // namespace

Grid2D grid_from_json(const json& j, const std::string& ptr) {
  View v(j, ptr);
  v.allow({"Nx", "Ny", "hx", "hy", "x0", "y0"});
  Grid2D g;
  g.Nx = v.integer("Nx", {}, 5);
  g.Ny = v.integer("Ny", {}, 5);
  g.hx = v.number("hx");
  g.hy = v.number("hy");
  if (!(g.hx > 0)) throw ConfigPathError(v.path("hx"), "must be positive");
  if (!(g.hy > 0)) throw ConfigPathError(v.path("hy"), "must be positive");
  g.x0 = v.number("x0", -g.hx * (g.Nx - 1) / 2.0);
  g.y0 = v.number("y0", -g.hy * (g.Ny - 1) / 2.0);
  return g;
}

RunConfig RunConfig::from_json(const json& j) {
  View root(j, "");
  root.allow({"algebra", "m1", "m2", "coefficients", "grid", "anchor", "derivatives", "substeps", "frame", "time",
              "chain_grid", "ds", "map", "identities", "tasks", "seed", "tol", "jobs", "out"});
  RunConfig c;
  if (root.has("algebra")) {
    View a(root.at("algebra"), "/algebra");
    a.allow({"series", "n"});
    try {
      c.series = parse_series(a.string("series", "A"));
    } catch (const ConfigPathError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigPathError(a.path("series"), e.what());
    }
    c.n = a.integer("n", 0, 1);
    if (c.series != Series::A) throw ConfigPathError(a.path("series"), "flows are implemented for the A series only");
  }
  c.m1 = root.integer("m1", 1, 1);
  c.m2 = root.integer("m2", 1, 1);
  if (c.n > 0 && (c.m1 > c.n || c.m2 > c.n))
    throw ConfigPathError(c.m1 > c.n ? "/m1" : "/m2", "depth exceeds the rank of the algebra");
  if (root.has("coefficients")) {
    const json& arr = root.at("coefficients");
    if (!arr.is_array()) throw ConfigPathError("/coefficients", "expected an array");
    if (c.n == 0 && !arr.empty()) throw ConfigPathError("/algebra", "missing required key (coefficients need it)");
    for (size_t k = 0; k < arr.size(); ++k) {
      const std::string p = child("/coefficients", k);
      View e(arr[k], p);
      e.allow({"side", "grade", "site", "kind", "params"});
      CoefficientSpec s;
      try {
        s.side = parse_side(e.string("side"));
      } catch (const ConfigPathError&) {
        throw;
      } catch (const std::exception& ex) {
        throw ConfigPathError(e.path("side"), ex.what());
      }
      s.grade = e.integer("grade", {}, 0);
      s.site = e.integer("site", {}, 1);
      const int depth = s.side == Side::minus ? c.m1 : c.m2;
      if (s.grade > depth) throw ConfigPathError(e.path("grade"), "exceeds the flow depth on this side");
      const int last = s.grade == 0 ? c.n : c.n - s.grade + 1;
      if (s.site > last) throw ConfigPathError(e.path("site"), "out of range 1.." + std::to_string(last));
      e.string("kind");
      if (!e.at("params").is_array()) throw ConfigPathError(e.path("params"), "expected an array of numbers");
      for (const auto& x : e.at("params"))
        if (!x.is_number()) throw ConfigPathError(e.path("params"), "expected an array of numbers");
      try {
        s.fn = CoeffFn::from_json(arr[k]);
      } catch (const std::exception& ex) {
        throw ConfigPathError(e.path("kind"), ex.what());
      }
      c.coefficients.push_back(s);
    }
  }
  if (root.has("grid")) c.grid = grid_from_json(root.at("grid"), "/grid");
  if (root.has("anchor")) {
    const json& a = root.at("anchor");
    if (a.is_string()) {
      std::string s = a.get<std::string>();
      if (s == "center") c.anchor = Anchor::center;
      else if (s == "corner") c.anchor = Anchor::corner;
      else throw ConfigPathError("/anchor", "expected \"center\", \"corner\" or {x, y}");
    } else {
      View v(a, "/anchor");
      v.allow({"x", "y"});
      c.anchor = Anchor::point;
      c.anchor_x = v.number("x");
      c.anchor_y = v.number("y");
    }
  }
  {
    std::string d = root.string("derivatives", "fd");
    if (d == "fd") c.derivatives = DerivativeMode::finite_difference;
    else if (d == "exact") c.derivatives = DerivativeMode::exact;
    else throw ConfigPathError("/derivatives", "expected \"fd\" or \"exact\"");
  }
  c.substeps = root.integer("substeps", 1, 1);
  if (root.has("frame")) c.frame = frame_at(root.at("frame"), "/frame");
  if (root.has("time")) {
    View t(root.at("time"), "/time");
    t.allow({"side", "fixed"});
    std::string s = t.string("side", "plus");
    if (s != "plus" && s != "minus") throw ConfigPathError(t.path("side"), "expected \"plus\" or \"minus\"");
    c.time_side = s == "plus" ? Side::plus : Side::minus;
    c.time_fixed = t.number("fixed", 0.0);
  }
  if (root.has("chain_grid")) c.chain_grid = grid_from_json(root.at("chain_grid"), "/chain_grid");
  if (root.has("ds")) {
    View d(root.at("ds"), "/ds");
    d.allow({"frame", "site", "grid", "t0", "ht", "Nt"});
    DSSpec s;
    s.frame = frame_at(d.at("frame"), "/ds/frame");
    s.site = d.integer("site", 1, 1);
    if (s.site > s.frame.size() - 1)
      throw ConfigPathError(d.path("site"), "out of range 1.." + std::to_string(s.frame.size() - 1));
    if (d.has("grid")) s.grid = grid_from_json(d.at("grid"), "/ds/grid");
    s.t0 = d.number("t0", s.t0);
    s.ht = d.number("ht", s.ht);
    if (!(s.ht > 0)) throw ConfigPathError(d.path("ht"), "must be positive");
    s.Nt = d.integer("Nt", s.Nt, 5);
    c.ds = s;
  }
  if (root.has("map")) {
    View m(root.at("map"), "/map");
    m.allow({"kind", "site", "iterations"});
    MapSpec s;
    try {
      s.kind = parse_map_kind(m.string("kind"));
    } catch (const ConfigPathError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigPathError(m.path("kind"), e.what());
    }
    s.site = m.integer("site", 1, 1);
    s.iterations = m.integer("iterations", 1, 1);
    c.map = s;
  }
  if (root.has("identities")) {
    View v(root.at("identities"), "/identities");
    v.allow({"max_rank", "samples"});
    c.max_rank = v.integer("max_rank", 4, 1);
    c.samples = v.integer("samples", 100, 1);
  }
  if (root.has("tasks")) {
    const json& t = root.at("tasks");
    if (!t.is_array()) throw ConfigPathError("/tasks", "expected an array of task names");
    for (size_t k = 0; k < t.size(); ++k) {
      if (!t[k].is_string()) throw ConfigPathError(child("/tasks", k), "expected a string");
      std::string s = t[k].get<std::string>();
      if (!known_tasks().count(s)) throw ConfigPathError(child("/tasks", k), "unknown task '" + s + "'");
      c.tasks.push_back(s);
    }
  }
  if (root.has("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigPathError("/seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (root.has("tol")) {
    c.tol = root.number("tol");
    if (!(*c.tol > 0)) throw ConfigPathError("/tol", "must be positive");
  }
  c.jobs = root.integer("jobs", 1, 1);
  c.out = root.string("out", "");
  return c;
}

json RunConfig::to_json() const {
  json j = json::object();
  j["algebra"] = {{"series", series_name(series)}};
  if (n > 0) j["algebra"]["n"] = n;
  j["m1"] = m1;
  j["m2"] = m2;
  json co = json::array();
  for (const auto& c : coefficients) co.push_back(coeff_json(c));
  j["coefficients"] = co;
  if (grid) j["grid"] = grid->to_json();
  if (anchor == Anchor::point) j["anchor"] = {{"x", anchor_x}, {"y", anchor_y}};
  else j["anchor"] = anchor == Anchor::center ? "center" : "corner";
  j["derivatives"] = derivatives == DerivativeMode::exact ? "exact" : "fd";
  j["substeps"] = substeps;
  if (frame) j["frame"] = frame->to_json();
  j["time"] = {{"side", side_name(time_side)}, {"fixed", time_fixed}};
  if (chain_grid) j["chain_grid"] = chain_grid->to_json();
  if (ds)
    j["ds"] = {{"frame", ds->frame.to_json()}, {"site", ds->site}, {"grid", ds->grid.to_json()},
               {"t0", ds->t0},                {"ht", ds->ht},     {"Nt", ds->Nt}};
  if (map) j["map"] = {{"kind", map_kind_name(map->kind)}, {"site", map->site}, {"iterations", map->iterations}};
  j["identities"] = {{"max_rank", max_rank}, {"samples", samples}};
  j["tasks"] = tasks;
  j["seed"] = seed;
  if (tol) j["tol"] = *tol;
  j["jobs"] = jobs;
  if (!out.empty()) j["out"] = out;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigPathError("", "cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigPathError("", std::string("malformed JSON: ") + e.what());
  }
  return RunConfig::from_json(j);
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& c) {
  // jobs and out do not change results
  json j = c.to_json();
  j.erase("jobs");
  j.erase("out");
  return fnv1a_hex(j.dump());
}

json report_envelope(const std::string& command, const RunConfig& c, const std::vector<ResidualReport>& reports,
                     const json& extra) {
  const std::string hash = config_hash(c);
  json env;
  env["tool"] = "lietoda";
  env["version"] = tool_version();
  env["command"] = command;
  env["config_hash"] = hash;
  json cj = c.to_json();
  cj.erase("jobs");
  cj.erase("out");
  env["config"] = cj;
  bool pass = true;
  json rs = json::array();
  for (const auto& r : reports) {
    json x = r.to_json();
    x["config_hash"] = hash;
    x["version"] = tool_version();
    rs.push_back(x);
    pass = pass && r.pass;
  }
  env["reports"] = rs;
  env["pass"] = pass;
  if (!extra.is_null())
    for (auto it = extra.begin(); it != extra.end(); ++it) env[it.key()] = it.value();
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  env["meta"] = {{"timestamp", ts}, {"jobs", c.jobs}, {"out", c.out}};
  return env;
}

std::string envelope_digest(const json& envelope) {
  json j = envelope;
  j.erase("meta");
  return fnv1a_hex(j.dump());
}

}  // namespace lietoda
