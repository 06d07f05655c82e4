#pragma once
// Subcommand pipelines: build flows and fields from a RunConfig and collect
// residual reports. Shared by the CLI and the acceptance driver.

#include "lietoda/config.hpp"
#include "lietoda/identities.hpp"

namespace lietoda {

struct PipelineOutput {
  std::vector<ResidualReport> reports;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  std::vector<std::array<int, 3>> singular;                  // (site, ix, iy) of vanishing tau values
  nlohmann::json extra = nlohmann::json::object();

  bool pass() const;
};

// flows of a config; ConfigPathError if /algebra or /grid is missing
FlowSetup flow_setup(const RunConfig& c);

PipelineOutput run_verify_algebra(Series series, int max_rank);
PipelineOutput run_verify_identities(const RunConfig& c);
PipelineOutput run_toda(const RunConfig& c);
PipelineOutput run_utoda(const RunConfig& c);
PipelineOutput run_gtoda(const RunConfig& c);
PipelineOutput run_map_oracle(const RunConfig& c);
PipelineOutput run_soliton(const RunConfig& c);

// "toda" | "utoda" | "gtoda" | "map" | "soliton" | "verify-identities"
PipelineOutput run_command(const std::string& command, const RunConfig& c);

// same schema as write_field_csv plus a tbar column: site,ix,iy,x,y,tbar,value
void write_spacetime_csv(std::ostream& os, const std::vector<std::pair<int, const SpaceTimeField*>>& fields);

}  // namespace lietoda
