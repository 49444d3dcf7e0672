#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sidm/diagnostics.hpp"
#include "sidm/error.hpp"
#include "sidm/io.hpp"
#include "sidm/mcmc.hpp"
#include "sidm/outcomes.hpp"
#include "sidm/simulate.hpp"

namespace fs = std::filesystem;
using namespace sidm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConvergence = 4;
constexpr double kRhatWarning = 1.1;

struct Options {
  std::string config;
  std::string out;
  bool force = false;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Options& o) {
  RunConfig c = load_run_config(o.config);
  if (!o.out.empty()) c.output = o.out;
  if (c.output.empty()) throw ConfigError("no output directory: set paths.output or pass --out");
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
    c.threads = *o.threads;
  }
  if (o.seed) c.seed = *o.seed;
  c.sampler.seed = c.seed;
  c.sampler.threads = c.threads;
  if (c.simulate) {
    c.simulate->seed = c.seed;
    c.simulate->threads = c.threads;
  }
  return c;
}

// Opens output files only after checking that none would be overwritten.
class Outputs {
 public:
  Outputs(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {}

  void claim(std::initializer_list<const char*> names) {
    for (const char* n : names)
      if (!force_ && fs::exists(dir_ / n))
        throw ConfigError("refusing to overwrite " + (dir_ / n).string() + " (use --force)");
    fs::create_directories(dir_);
  }
  std::ofstream open(const char* name) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (dir_ / name).string());
    return f;
  }

 private:
  fs::path dir_;
  bool force_;
};

std::ifstream open_input(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError("config does not name the " + what);
  if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + what + ": " + p.string());
  return f;
}

void write_diagnostics(std::ostream& out, const DiagnosticsReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& p : r.parameters)
    rows.push_back({{"parameter", p.name},
                    {"mean", p.mean},
                    {"sd", p.sd},
                    {"q025", p.q025},
                    {"q975", p.q975},
                    {"rhat", p.rhat ? nlohmann::ordered_json(*p.rhat) : nlohmann::ordered_json(nullptr)},
                    {"ess_bulk", p.ess_degenerate ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(p.ess_bulk)}});
  j["parameters"] = rows;
  j["notices"] = r.notices;
  out << j.dump(2) << '\n';
}

int convergence_code(const DiagnosticsReport& r) {
  const double rhat = r.max_rhat();
  if (std::isfinite(rhat) && rhat > kRhatWarning) {
    std::cerr << "warning: max split-R-hat " << rhat << " exceeds " << kRhatWarning << '\n';
    return kExitConvergence;
  }
  return kExitOk;
}

int cmd_simulate(const Options& o) {
  const RunConfig c = load(o);
  if (!c.simulate) throw ConfigError("config has no 'simulate' section");
  SimConfig sim = *c.simulate;
  sim.graph = c.graph();
  Outputs out(c.output, o.force);
  out.claim({"cohort.csv", "truth.json"});
  const SimResult r = simulate_cohort(sim);
  CohortTable t;
  for (const auto& cv : sim.covariates) t.covariate_names.push_back(cv.name);
  t.subjects = r.subjects;
  for (std::size_t i = 0; i < r.subjects.size(); ++i) t.ids.push_back(std::to_string(i + 1));
  auto csv = out.open("cohort.csv");
  write_cohort_csv(csv, t);
  auto truth = out.open("truth.json");
  truth << truth_json(r.truth, t.covariate_names).dump(2) << '\n';
  return kExitOk;
}

int cmd_fit(const Options& o) {
  const RunConfig c = load(o);
  const SpatialGraph g = c.graph();
  auto in = open_input(c.cohort, "cohort file");
  CohortTable table = read_cohort_csv(in);
  if (!c.covariates.empty()) {
    std::vector<std::string> names;
    for (const auto& s : c.covariates) names.push_back(s.name);
    table = select_covariates(table, names);
  }
  for (std::size_t i = 0; i < table.subjects.size(); ++i)
    if (table.subjects[i].region >= g.n_regions())
      throw DataError("row " + std::to_string(i + 2) + ": region " + std::to_string(table.subjects[i].region + 1) +
                      " is not in the graph");
  std::vector<bool> flags(table.covariate_names.size(), false);
  for (std::size_t l = 0; l < c.covariates.size(); ++l) flags[l] = c.covariates[l].center;
  const auto constants = center_covariates(table.subjects, flags);
  std::map<std::string, double> centers;
  for (std::size_t l = 0; l < constants.size(); ++l) centers[table.covariate_names[l]] = constants[l];

  Outputs out(c.output, o.force);
  out.claim({"draws.csv", "summary.json", "diagnostics.json"});
  PosteriorDraws draws = run(table.subjects, g, c.prior, c.sampler);
  draws.covariate_names = table.covariate_names;
  const DiagnosticsReport rep = diagnostics(draws, true);
  auto d = out.open("draws.csv");
  write_draws_csv(d, draws);
  auto s = out.open("summary.json");
  s << summary_json(rep, draws, centers).dump(2) << '\n';
  auto dj = out.open("diagnostics.json");
  write_diagnostics(dj, rep);
  return convergence_code(rep);
}

int cmd_outcomes(const Options& o) {
  const RunConfig c = load(o);
  if (c.outcomes.empty()) throw ConfigError("config requests no outcomes");
  auto din = open_input(c.output / "draws.csv", "draws file");
  const PosteriorDraws draws = read_draws_csv(din);
  auto sin = open_input(c.output / "summary.json", "summary file");
  nlohmann::json summary;
  try {
    summary = nlohmann::json::parse(sin);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("summary.json: ") + e.what());
  }
  std::map<std::string, double> centers;
  if (summary.contains("centers")) centers = summary["centers"].get<std::map<std::string, double>>();

  std::vector<ProfileRequest> profiles = c.profiles;
  if (profiles.empty()) profiles.push_back({"reference", {}});
  for (const auto& p : profiles)
    for (const auto& [name, v] : p.values)
      if (std::find(draws.covariate_names.begin(), draws.covariate_names.end(), name) == draws.covariate_names.end())
        throw ConfigError("profile '" + p.label + "' names unknown covariate '" + name + "'");
  for (int k : c.outcome_regions)
    if (k >= draws.n_regions()) throw ConfigError("outcomes.regions entry exceeds the fitted regions");

  Outputs out(c.output, o.force);
  out.claim({"outcomes.csv"});
  std::vector<SummaryRow> rows;
  for (const auto& req : c.outcomes) {
    const OutcomeGrid grid{req.measure, req.times, req.s, req.t12};
    for (const auto& pr : profiles) {
      Profile p;
      p.label = pr.label;
      p.covariates.resize(static_cast<Eigen::Index>(draws.covariate_names.size()));
      for (std::size_t l = 0; l < draws.covariate_names.size(); ++l) {
        const auto& name = draws.covariate_names[l];
        const double center = centers.count(name) ? centers.at(name) : 0.0;
        const auto it = pr.values.find(name);
        p.covariates[static_cast<Eigen::Index>(l)] = it == pr.values.end() ? 0.0 : it->second - center;
      }
      const auto part = posterior_summary(draws, p, grid, c.outcome_regions);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  auto f = out.open("outcomes.csv");
  write_outcomes_csv(f, rows);
  return kExitOk;
}

int cmd_diagnose(const Options& o) {
  const RunConfig c = load(o);
  auto din = open_input(c.output / "draws.csv", "draws file");
  const PosteriorDraws draws = read_draws_csv(din);
  const DiagnosticsReport rep = diagnostics(draws, true);
  Outputs out(c.output, true);
  out.claim({});
  auto f = out.open("diagnostics.json");
  write_diagnostics(f, rep);
  for (const auto& p : rep.parameters) {
    std::cout << p.name << " mean=" << format_double(p.mean) << " sd=" << format_double(p.sd)
              << " rhat=" << (p.rhat ? format_double(*p.rhat) : std::string("NA"))
              << " ess=" << (p.ess_degenerate ? std::string("NA") : format_double(p.ess_bulk)) << '\n';
  }
  for (const auto& n : rep.notices) std::cout << "note: " << n << '\n';
  return convergence_code(rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian spatial illness-death survival models"};
  app.require_subcommand(1);
  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory (overrides paths.output)");
    sub->add_flag("--force", opts.force, "Overwrite existing outputs");
    sub->add_option("--threads", opts.threads, "Worker threads");
    sub->add_option("--seed", opts.seed, "Random seed (overrides config)");
  };
  auto* sim = app.add_subcommand("simulate", "Simulate a synthetic cohort");
  auto* fit = app.add_subcommand("fit", "Sample the posterior");
  auto* outc = app.add_subcommand("outcomes", "Posterior transition probabilities by region");
  auto* diag = app.add_subcommand("diagnose", "Convergence diagnostics for saved draws");
  for (auto* s : {sim, fit, outc, diag}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    if (sim->parsed()) return cmd_simulate(opts);
    if (fit->parsed()) return cmd_fit(opts);
    if (outc->parsed()) return cmd_outcomes(opts);
    return cmd_diagnose(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
