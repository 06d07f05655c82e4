#pragma once
// Run configuration: schema validation with JSON-pointer diagnostics, the
// normalized form, its hash, and the report envelope.

#include "lietoda/lattice.hpp"
#include "lietoda/mappings.hpp"
#include "lietoda/solitons.hpp"

#include <cstdint>
#include <optional>

namespace lietoda {

std::string tool_version();

// Thrown for schema violations; `pointer` is the JSON pointer of the
// offending value ("" for the root).
struct ConfigPathError : ConfigError {
  std::string pointer;
  ConfigPathError(std::string ptr, const std::string& msg)
      : ConfigError((ptr.empty() ? std::string("/") : ptr) + ": " + msg), pointer(std::move(ptr)) {}
};

struct CoefficientSpec {
  Side side = Side::minus;
  int grade = 1;
  int site = 1;
  CoeffFn fn;
};

enum class Anchor { center, corner, point };

struct DSSpec {
  WronskianFrame frame;
  int site = 1;
  Grid2D grid = Grid2D::centered(101, 0.02);
  double t0 = -0.2, ht = 0.01;
  int Nt = 41;
};

struct MapSpec {
  MapKind kind = MapKind::utoda11;
  int site = 1;  // lattice site of the source pair
  int iterations = 1;
};

struct RunConfig {
  Series series = Series::A;
  int n = 0;  // 0: no algebra section
  int m1 = 1, m2 = 1;
  std::vector<CoefficientSpec> coefficients;
  std::optional<Grid2D> grid;
  Anchor anchor = Anchor::center;
  double anchor_x = 0.0, anchor_y = 0.0;  // Anchor::point
  DerivativeMode derivatives = DerivativeMode::finite_difference;
  int substeps = 1;

  std::optional<WronskianFrame> frame;
  Side time_side = Side::plus;
  double time_fixed = 0.0;
  std::optional<Grid2D> chain_grid;
  std::optional<DSSpec> ds;
  std::optional<MapSpec> map;
  int max_rank = 4, samples = 100;

  std::vector<std::string> tasks;  // empty: the subcommand's defaults
  std::uint64_t seed = 1;
  std::optional<double> tol;
  int jobs = 1;
  std::string out;

  nlohmann::json to_json() const;  // normalized; from_json(to_json()) round-trips
  static RunConfig from_json(const nlohmann::json& j);  // throws ConfigPathError
};

RunConfig load_config(const std::string& path);  // ConfigPathError on unreadable or malformed files

Grid2D grid_from_json(const nlohmann::json& j, const std::string& pointer);

// FNV-1a (64 bit) of the compact dump, as 16 hex digits
std::string fnv1a_hex(const std::string& s);
std::string config_hash(const RunConfig& c);

// {tool, version, command, config_hash, config, pass, reports, meta}. Each
// report also carries config_hash and version. Nondeterministic values
// (timestamp, runtime, jobs, output directory) go into meta only.
nlohmann::json report_envelope(const std::string& command, const RunConfig& c,
                               const std::vector<ResidualReport>& reports, const nlohmann::json& extra = {});
// hash of the envelope with "meta" removed
std::string envelope_digest(const nlohmann::json& envelope);

}  // namespace lietoda
