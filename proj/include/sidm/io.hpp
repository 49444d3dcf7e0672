#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sidm/diagnostics.hpp"
#include "sidm/mcmc.hpp"
#include "sidm/outcomes.hpp"
#include "sidm/simulate.hpp"

namespace sidm {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

struct CohortTable {
  std::vector<std::string> ids;
  std::vector<std::string> covariate_names;
  /// Regions are 0-indexed here and 1-indexed in the file.
  std::vector<Subject> subjects;
};

/// Columns: subject_id, region, covariates..., t1, e1, t2, e2.
void write_cohort_csv(std::ostream& out, const CohortTable& table);
/// Throws DataError naming the offending row (1-indexed, header is row 1).
CohortTable read_cohort_csv(std::istream& in);

/// Keeps the named covariate columns, in the given order. Throws ConfigError
/// when a name is not a column.
CohortTable select_covariates(const CohortTable& table, const std::vector<std::string>& names);

/// Long format: chain, iteration, parameter, value (chains 1-indexed).
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws);
PosteriorDraws read_draws_csv(std::istream& in);

/// Table-shaped summary: transitions, hyperparameters, region effect means,
/// diagnostics and the centering constants needed to build profiles.
nlohmann::ordered_json summary_json(const DiagnosticsReport& report, const PosteriorDraws& draws,
                                    const std::map<std::string, double>& centers);

nlohmann::ordered_json truth_json(const SimTruth& truth, const std::vector<std::string>& covariates);

/// Columns: region, label, time, measure, mean, sd, q025, q975 (regions 1-indexed).
void write_outcomes_csv(std::ostream& out, std::span<const SummaryRow> rows);

struct CovariateSchema {
  std::string name;
  bool center = false;
};

struct ProfileRequest {
  std::string label;
  /// Raw-scale covariate values by name; missing names take their centering value.
  std::map<std::string, double> values;
};

struct OutcomeRequest {
  Measure measure = Measure::S1;
  std::vector<double> times;
  double s = 0.0;
  std::optional<double> t12;
};

struct RunConfig {
  int version = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path cohort;
  std::filesystem::path adjacency;
  std::filesystem::path output;
  int n_regions = 0;
  std::optional<std::pair<int, int>> grid;
  /// Empty means every covariate column of the cohort, uncentered.
  std::vector<CovariateSchema> covariates;
  PriorConfig prior;
  SamplerConfig sampler;
  std::optional<SimConfig> simulate;
  std::vector<ProfileRequest> profiles;
  std::vector<OutcomeRequest> outcomes;
  /// 0-indexed; empty means all regions.
  std::vector<int> outcome_regions;

  /// The adjacency file or lattice named by the config.
  SpatialGraph graph() const;
};

/// Relative paths resolve against `base`. Unknown keys and missing required
/// fields throw ConfigError.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace sidm
