// lietoda command-line driver.
// Exit codes: 0 all suites pass, 1 some suite fails, 2 configuration or
// usage error, 3 numerical singularity.

#include "lietoda/pipelines.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lietoda;

namespace {

struct Common {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> jobs;
};

void add_common(CLI::App* sub, Common& c, bool need_config) {
  auto* opt = sub->add_option("--config", c.config, "run configuration (JSON)");
  if (need_config) opt->required();
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--tol", c.tol, "tolerance overriding the per-suite defaults")->check(CLI::PositiveNumber);
  sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

RunConfig effective_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.tol) cfg.tol = *c.tol;
  if (c.jobs) cfg.jobs = *c.jobs;
  if (!c.out.empty()) cfg.out = c.out;
  if (cfg.out.empty()) cfg.out = "out";
  return cfg;
}

void write_atomic(const fs::path& p, const std::string& data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary);
    if (!o) throw std::runtime_error("cannot write " + tmp.string());
    o << data;
    if (!o) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

void print_reports(const std::vector<ResidualReport>& rs) {
  for (const auto& r : rs)
    std::printf("%s %s max_abs=%.3e tol=%.1e\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.max_abs, r.tol);
}

int finish(const std::string& command, const RunConfig& cfg, const PipelineOutput& out, double seconds) {
  json extra = json::object();
  if (!out.extra.empty()) extra["extra"] = out.extra;
  json sing = json::array();
  for (const auto& s : out.singular) sing.push_back({s[0], s[1], s[2]});
  extra["singular_nodes"] = sing;
  json env = report_envelope(command, cfg, out.reports, extra);
  env["meta"]["runtime_s"] = seconds;
  const fs::path dir(cfg.out);
  write_atomic(dir / (command + ".json"), env.dump(2) + "\n");
  for (const auto& [name, data] : out.files) write_atomic(dir / name, data);
  print_reports(out.reports);
  std::printf("config_hash %s digest %s\n", env["config_hash"].get<std::string>().c_str(),
              envelope_digest(env).c_str());
  if (!out.singular.empty()) {
    std::fprintf(stderr, "singular: tau vanishes or changes sign at %zu node(s) (site, ix, iy):", out.singular.size());
    for (size_t k = 0; k < out.singular.size() && k < 50; ++k)
      std::fprintf(stderr, " (%d,%d,%d)", out.singular[k][0], out.singular[k][1], out.singular[k][2]);
    std::fprintf(stderr, "%s\n", out.singular.size() > 50 ? " ..." : "");
    return 3;
  }
  return out.pass() ? 0 : 1;
}

int map_file(MapKind kind, const std::string& in, int iterations, const std::string& out) {
  std::ifstream is(in);
  if (!is) throw ConfigPathError("", "cannot read field file '" + in + "'");
  Grid2D g;
  std::map<int, Field2D> f = read_field_csv(is, g);
  std::vector<Field2D> fields;
  for (int k = 1; k <= map_arity(kind); ++k) {
    auto it = f.find(k);
    if (it == f.end())
      throw ConfigPathError("", "field file lacks component " + std::to_string(k) + " (site column) for " +
                                    map_kind_name(kind));
    fields.push_back(it->second);
  }
  if (static_cast<int>(f.size()) != map_arity(kind))
    throw ConfigPathError("", "field file has " + std::to_string(f.size()) + " components, " + map_kind_name(kind) +
                                  " transforms " + std::to_string(map_arity(kind)));
  MappingState s = apply_map(make_state(kind, g, std::move(fields)), iterations);
  std::vector<std::pair<int, const Field2D*>> w;
  for (size_t k = 0; k < s.fields.size(); ++k) w.push_back({static_cast<int>(k + 1), &s.fields[k]});
  std::ostringstream os;
  write_field_csv(os, g, w);
  write_atomic(out, os.str());
  std::printf("mapped %s x%d, valid interior ring %d\n", map_kind_name(kind).c_str(), iterations, s.ring);
  return 0;
}

int summarize_reports(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<fs::path> files;
  for (const auto& s : inputs) {
    fs::path p(s);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.path().extension() == ".json") files.push_back(e.path());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw ConfigPathError("", "no such report '" + s + "'");
    }
  }
  std::sort(files.begin(), files.end());
  json runs = json::array();
  bool pass = true;
  long suites = 0, failed = 0;
  for (const auto& p : files) {
    std::ifstream is(p);
    json env;
    try {
      env = json::parse(is);
    } catch (const json::parse_error& e) {
      throw ConfigPathError("", "malformed report " + p.string() + ": " + e.what());
    }
    if (!env.is_object() || !env.contains("reports") || !env.contains("tool")) continue;  // not a run envelope
    json worst = nullptr;
    for (const auto& r : env["reports"]) {
      ++suites;
      if (!r.value("pass", false)) ++failed;
      if (r["max_abs"].is_number() &&
          (worst.is_null() || r["max_abs"].get<double>() > worst["max_abs"].get<double>()))
        worst = {{"name", r["name"]}, {"max_abs", r["max_abs"]}, {"tol", r["tol"]}};
    }
    const bool ok = env.value("pass", false) && env.value("singular_nodes", json::array()).empty();
    pass = pass && ok;
    runs.push_back({{"file", p.filename().string()},
                    {"command", env.value("command", "")},
                    {"config_hash", env.value("config_hash", "")},
                    {"digest", envelope_digest(env)},
                    {"pass", ok},
                    {"suites", env["reports"].size()},
                    {"worst", worst}});
  }
  json summary = {{"tool", "lietoda"}, {"version", tool_version()}, {"runs", runs},
                  {"suites", suites},  {"failed", failed},          {"pass", pass}};
  const std::string text = summary.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_atomic(out, text);
  for (const auto& r : runs)
    std::printf("%s %s %s digest %s\n", r["pass"].get<bool>() ? "PASS" : "FAIL", r["file"].get<std::string>().c_str(),
                r["command"].get<std::string>().c_str(), r["digest"].get<std::string>().c_str());
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-algebraic Toda lattices: representations, flows, lattice residuals, maps and solitons"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  Common c_alg, c_id, c_toda, c_utoda, c_gtoda, c_map, c_sol;
  std::string series = "A";
  int max_rank = 4, samples = 100;
  bool rank_set = false, samples_set = false;

  auto* alg = app.add_subcommand("verify-algebra", "Chevalley and grading relations of fundamental representations");
  add_common(alg, c_alg, false);
  alg->add_option("--series", series, "A, B, C, D or G2");
  alg->add_option("--max-rank", max_rank, "largest rank")->check(CLI::PositiveNumber);

  auto* ids = app.add_subcommand("verify-identities", "seeded sweeps of both Jacobi identities and the recurrence");
  add_common(ids, c_id, false);
  ids->add_option("--series", series, "A only");
  ids->add_option("--max-rank", max_rank, "largest rank")->check(CLI::PositiveNumber)->each([&](const std::string&) {
    rank_set = true;
  });
  ids->add_option("--samples", samples, "group elements per (n, j)")->check(CLI::PositiveNumber)->each(
      [&](const std::string&) { samples_set = true; });

  auto* toda = app.add_subcommand("toda", "Toda residuals from configured flows");
  add_common(toda, c_toda, true);
  auto* utoda = app.add_subcommand("utoda", "UToda(m1,m2) residuals");
  add_common(utoda, c_utoda, true);
  auto* gtoda = app.add_subcommand("gtoda", "GToda(2,2;s,sbar) residuals");
  add_common(gtoda, c_gtoda, true);

  auto* map = app.add_subcommand("map", "apply a lattice map to a field file, or run the chain oracle of a config");
  add_common(map, c_map, false);
  std::string kind, in;
  int iterations = 1;
  map->add_option("--kind", kind, "utoda11, dt or utoda12");
  map->add_option("--in", in, "input field CSV (site column = component index)");
  map->add_option("--iterations", iterations, "applications")->check(CLI::PositiveNumber);

  auto* sol = app.add_subcommand("soliton", "Wronskian frames, nilpotent chains, time-dependent tau and DS fields");
  add_common(sol, c_sol, true);

  auto* rep = app.add_subcommand("report", "aggregate run reports into one summary");
  std::vector<std::string> rep_in;
  std::string rep_out;
  rep->add_option("--in", rep_in, "report files or directories")->required();
  rep->add_option("--out", rep_out, "summary file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    if (*alg) {
      RunConfig cfg = effective_config(c_alg);
      Series s;
      try {
        s = parse_series(series);
      } catch (const ConfigError& e) {
        throw ConfigPathError("", std::string("--series: ") + e.what());
      }
      cfg.max_rank = max_rank;
      cfg.series = s;
      return finish("verify-algebra", cfg, run_verify_algebra(s, max_rank), seconds());
    }
    if (*ids) {
      if (series != "A") throw ConfigPathError("", "--series: the identities are implemented for the A series");
      RunConfig cfg = effective_config(c_id);
      if (rank_set) cfg.max_rank = max_rank;
      if (samples_set) cfg.samples = samples;
      return finish("verify-identities", cfg, run_verify_identities(cfg), seconds());
    }
    if (*rep) return summarize_reports(rep_in, rep_out);
    if (*map) {
      if (!in.empty()) {
        if (kind.empty()) throw ConfigPathError("", "--kind is required with --in");
        if (c_map.out.empty()) throw ConfigPathError("", "--out (output CSV) is required with --in");
        return map_file(parse_map_kind(kind), in, iterations, c_map.out);
      }
      if (c_map.config.empty()) throw ConfigPathError("", "map needs --in FILE or --config FILE");
      RunConfig cfg = effective_config(c_map);
      if (!kind.empty()) {
        if (!cfg.map) cfg.map = MapSpec{};
        cfg.map->kind = parse_map_kind(kind);
      }
      return finish("map", cfg, run_map_oracle(cfg), seconds());
    }
    for (auto [sub, com, name] : {std::tuple{toda, &c_toda, "toda"}, std::tuple{utoda, &c_utoda, "utoda"},
                                  std::tuple{gtoda, &c_gtoda, "gtoda"}, std::tuple{sol, &c_sol, "soliton"}})
      if (*sub) {
        RunConfig cfg = effective_config(*com);
        return finish(name, cfg, run_command(name, cfg), seconds());
      }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "contract error: %s\n", e.what());
    return 2;
  } catch (const SingularMapping& e) {
    std::fprintf(stderr, "singular: %s at %zu node(s) (ix, iy):", e.what(), e.nodes.size());
    for (size_t k = 0; k < e.nodes.size() && k < 50; ++k) std::fprintf(stderr, " (%d,%d)", e.nodes[k][0], e.nodes[k][1]);
    std::fprintf(stderr, "\n");
    return 3;
  } catch (const GenericityError& e) {
    std::fprintf(stderr, "singular: %s\n", e.what());
    return 3;
  } catch (const SingularConfiguration& e) {
    std::fprintf(stderr, "singular: %s (site %d)\n", e.what(), e.site);
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "argument error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
