#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sidm/likelihood.hpp"
#include "sidm/mcmc.hpp"
#include "sidm/quadrature.hpp"

namespace sidm {

/// Posterior functionals. S1 is the state-F sojourn survival; pIJ are transition
/// probabilities between states 1 = F, 2 = R, 3 = D; F12/F13 are cumulative
/// incidences of refracture and of death without refracture.
enum class Measure { S1, p11, p12, p13, p22, p23, F12, F13 };

std::string_view measure_name(Measure m);
/// Throws std::invalid_argument for unknown names.
Measure parse_measure(std::string_view name);
/// p22 and p23 are conditional on the refracture time t12.
bool needs_t12(Measure m);

/// Covariates on the model's (centered) scale plus a region.
struct Profile {
  std::string label;
  Eigen::VectorXd covariates;
  int region = 0;

  void validate(const ModelState& m) const;
};

struct OutcomeGrid {
  Measure measure = Measure::S1;
  std::vector<double> times;
  double s = 0.0;
  std::optional<double> t12;

  /// Times increasing and >= s; s >= 0; t12 present (and <= s) exactly for p22/p23.
  void validate() const;
};

double sojourn_survival(const ModelState& m, const Profile& p, double t);

/// p11, p12, p13 from (s, t); p22, p23 from (s, t | t12) on the clock reset at t12.
/// S1/F12/F13 ignore s and read t as time since entry.
double transition_probability(const ModelState& m, const Profile& p, Measure measure, double s,
                              double t, std::optional<double> t12 = std::nullopt,
                              const QuadratureOptions& q = {});

/// Cumulative incidence of leaving F by transition j (FR or FD) by time t.
double cumulative_incidence(const ModelState& m, const Profile& p, Transition j, double t,
                            const QuadratureOptions& q = {});

/// Value of grid.measure at time t for one state.
double evaluate(const ModelState& m, const Profile& p, const OutcomeGrid& grid, double t,
                const QuadratureOptions& q = {});

struct SummaryRow {
  int region = 0;  // 0-indexed
  std::string label;
  double time = 0.0;
  Measure measure = Measure::S1;
  double mean = 0.0, sd = 0.0, q025 = 0.0, q975 = 0.0;
};

/// Evaluates the measure per draw and summarizes pointwise. Rows are ordered by
/// region, then time. `regions` empty means every region.
std::vector<SummaryRow> posterior_summary(const PosteriorDraws& draws, const Profile& profile,
                                          const OutcomeGrid& grid, std::span<const int> regions = {});

}  // namespace sidm
