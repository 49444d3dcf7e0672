#include "sidm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "sidm/error.hpp"

namespace sidm {
namespace {

using json = nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  return out;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_double(const std::string& s, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw DataError("row " + std::to_string(row) + ": column '" + column + "' is not a number: '" + s +
                    "'");
  return v;
}

long parse_int(const std::string& s, std::size_t row, const std::string& column) {
  long v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw DataError("row " + std::to_string(row) + ": column '" + column + "' is not an integer: '" + s +
                    "'");
  return v;
}

// Walks a JSON object, failing on keys that were never asked for.
class Object {
 public:
  Object(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~Object() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key '" + k + "' in " + where_);
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }
  const json& at(const std::string& k) {
    if (!has(k)) throw ConfigError(where_ + ": missing required key '" + k + "'");
    return j_.at(k);
  }
  template <typename T>
  T get(const std::string& k) {
    try {
      return at(k).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + ": key '" + k + "' has the wrong type");
    }
  }
  template <typename T>
  void maybe(const std::string& k, T& out) {
    if (has(k)) out = get<T>(k);
  }
  std::string path(const std::string& k) const { return where_ + "." + k; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

PriorConfig parse_prior(const json& j) {
  PriorConfig p;
  Object o(j, "prior");
  o.maybe("beta_precision", p.beta_precision);
  o.maybe("wishart_df", p.wishart_df);
  if (o.has("wishart_scale")) {
    const auto rows = o.get<std::vector<std::vector<double>>>("wishart_scale");
    if (rows.size() != 3) throw ConfigError("prior.wishart_scale must be 3x3");
    for (int a = 0; a < 3; ++a) {
      if (rows[a].size() != 3) throw ConfigError("prior.wishart_scale must be 3x3");
      for (int b = 0; b < 3; ++b) p.wishart_scale(a, b) = rows[a][b];
    }
  }
  if (o.has("shape_prior")) {
    const auto s = o.get<std::string>("shape_prior");
    if (s == "lognormal") p.shape_prior = ShapePrior::lognormal;
    else if (s == "pc") p.shape_prior = ShapePrior::pc_numeric;
    else throw ConfigError("prior.shape_prior must be 'lognormal' or 'pc'");
  }
  o.maybe("shape_sd", p.shape_sd);
  o.maybe("pc_rate", p.pc_rate);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("prior: ") + e.what());
  }
  return p;
}

SamplerConfig parse_sampler(const json& j) {
  SamplerConfig s;
  Object o(j, "sampler");
  o.maybe("chains", s.n_chains);
  o.maybe("warmup", s.n_warmup);
  o.maybe("samples", s.n_samples);
  o.maybe("thin", s.thin);
  o.maybe("target_acceptance", s.target_acceptance);
  o.maybe("inner_sweeps", s.inner_sweeps);
  o.maybe("hessian_interval", s.hessian_interval);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

TransitionParams parse_transition_params(const json& j, const std::string& where) {
  Object o(j, where);
  TransitionParams p;
  p.shape = o.get<double>("shape");
  if (o.has("scale") && o.has("intercept"))
    throw ConfigError(where + ": give either scale or intercept, not both");
  if (o.has("scale")) {
    const double s = o.get<double>("scale");
    if (!(s > 0.0)) throw ConfigError(where + ".scale must be > 0");
    p.intercept = std::log(s);
  } else {
    p.intercept = o.get<double>("intercept");
  }
  const auto beta = o.has("coefficients") ? o.get<std::vector<double>>("coefficients") : std::vector<double>{};
  p.coefficients = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  return p;
}

SimConfig parse_simulate(const json& j) {
  SimConfig c;
  Object o(j, "simulate");
  c.n_subjects = o.get<int>("n_subjects");
  o.maybe("horizon", c.horizon);
  if (o.has("no_censoring") && o.get<bool>("no_censoring")) c.horizon = std::numeric_limits<double>::infinity();
  o.maybe("dropout_rate", c.dropout_rate);
  o.maybe("gamma", c.mix.gamma);
  o.maybe("precisions", c.between.precisions);
  o.maybe("correlations", c.between.correlations);
  o.maybe("region_weights", c.region_weights);
  if (o.has("covariates")) {
    c.covariates.clear();
    for (const auto& cj : o.at("covariates")) {
      Object co(cj, "simulate.covariates[]");
      CovariateSpec s;
      s.name = co.get<std::string>("name");
      const auto kind = co.get<std::string>("kind");
      if (kind == "bernoulli") s.kind = CovariateSpec::Kind::bernoulli;
      else if (kind == "normal") s.kind = CovariateSpec::Kind::normal;
      else throw ConfigError("covariate kind must be 'bernoulli' or 'normal'");
      co.maybe("probability", s.probability);
      co.maybe("mean", s.mean);
      co.maybe("sd", s.sd);
      if (co.has("lower")) s.lower = co.get<double>("lower");
      co.maybe("center", s.center);
      c.covariates.push_back(s);
    }
  }
  const json& tj = o.at("transitions");
  Object to(tj, "simulate.transitions");
  for (Transition t : kAllTransitions) {
    const std::string name(transition_name(t));
    c.params[index(t)] = parse_transition_params(to.at(name), "simulate.transitions." + name);
    if (c.params[index(t)].coefficients.size() != static_cast<Eigen::Index>(c.covariates.size()))
      throw ConfigError("simulate.transitions." + name + ": need one coefficient per simulated covariate (" +
                        std::to_string(c.covariates.size()) + ")");
  }
  return c;
}

json state_params_json(const TransitionParams& p, const std::vector<std::string>& names) {
  json j = json::object();
  j["shape"] = p.shape;
  j["scale"] = p.scale();
  j["intercept"] = p.intercept;
  json beta = json::object();
  for (std::size_t l = 0; l < names.size(); ++l) beta[names[l]] = p.coefficients[static_cast<Eigen::Index>(l)];
  j["coefficients"] = beta;
  return j;
}

nlohmann::ordered_json stat_json(const ParameterSummary& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["sd"] = s.sd;
  j["q025"] = s.q025;
  j["q975"] = s.q975;
  j["rhat"] = s.rhat ? nlohmann::ordered_json(*s.rhat) : nlohmann::ordered_json(nullptr);
  j["ess_bulk"] = s.ess_degenerate ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(s.ess_bulk);
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void write_cohort_csv(std::ostream& out, const CohortTable& t) {
  out << "subject_id,region";
  for (const auto& n : t.covariate_names) out << ',' << n;
  out << ",t1,e1,t2,e2\n";
  for (std::size_t i = 0; i < t.subjects.size(); ++i) {
    const Subject& s = t.subjects[i];
    out << quote_csv(i < t.ids.size() ? t.ids[i] : std::to_string(i + 1)) << ',' << s.region + 1;
    for (Eigen::Index l = 0; l < s.covariates.size(); ++l) out << ',' << format_double(s.covariates[l]);
    out << ',' << format_double(s.t1) << ',' << static_cast<int>(s.e1) << ',';
    if (s.t2) out << format_double(*s.t2);
    out << ',';
    if (s.e2) out << static_cast<int>(*s.e2);
    out << '\n';
  }
}

CohortTable read_cohort_csv(std::istream& in) {
  std::string line;
  if (!read_line(in, line)) throw DataError("row 1: cohort file is empty");
  const auto header = split_csv(line);
  const std::size_t nc = header.size();
  if (nc < 6 || header[0] != "subject_id" || header[1] != "region" || header[nc - 4] != "t1" ||
      header[nc - 3] != "e1" || header[nc - 2] != "t2" || header[nc - 1] != "e2")
    throw DataError("row 1: header must be subject_id,region,<covariates...>,t1,e1,t2,e2");
  CohortTable t;
  t.covariate_names.assign(header.begin() + 2, header.end() - 4);
  std::set<std::string> unique(t.covariate_names.begin(), t.covariate_names.end());
  if (unique.size() != t.covariate_names.size()) throw DataError("row 1: duplicate covariate column");
  const int l = static_cast<int>(t.covariate_names.size());
  std::set<std::string> seen_ids;
  std::size_t row = 1;
  while (read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != nc)
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(nc) + " fields, got " +
                      std::to_string(cells.size()));
    Subject s;
    const long region = parse_int(cells[1], row, "region");
    if (region < 1) throw DataError("row " + std::to_string(row) + ": region must be >= 1");
    s.region = static_cast<int>(region - 1);
    s.covariates.resize(l);
    for (int k = 0; k < l; ++k) s.covariates[k] = parse_double(cells[2 + k], row, t.covariate_names[k]);
    s.t1 = parse_double(cells[nc - 4], row, "t1");
    const long e1 = parse_int(cells[nc - 3], row, "e1");
    if (e1 < 0 || e1 > 2) throw DataError("row " + std::to_string(row) + ": e1 must be 0, 1 or 2");
    s.e1 = static_cast<FirstExit>(e1);
    if (!cells[nc - 2].empty()) s.t2 = parse_double(cells[nc - 2], row, "t2");
    if (!cells[nc - 1].empty()) {
      const long e2 = parse_int(cells[nc - 1], row, "e2");
      if (e2 < 0 || e2 > 1) throw DataError("row " + std::to_string(row) + ": e2 must be 0 or 1");
      s.e2 = static_cast<SecondExit>(e2);
    }
    try {
      s.validate(l);
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(row) + ": " + e.what());
    }
    if (cells[0].empty() || !seen_ids.insert(cells[0]).second)
      throw DataError("row " + std::to_string(row) + ": subject_id '" + cells[0] + "' is empty or repeated");
    t.ids.push_back(cells[0]);
    t.subjects.push_back(std::move(s));
  }
  return t;
}

CohortTable select_covariates(const CohortTable& table, const std::vector<std::string>& names) {
  std::vector<int> cols;
  for (const auto& n : names) {
    const auto it = std::find(table.covariate_names.begin(), table.covariate_names.end(), n);
    if (it == table.covariate_names.end())
      throw ConfigError("unknown covariate '" + n + "': not a column of the cohort");
    cols.push_back(static_cast<int>(it - table.covariate_names.begin()));
  }
  CohortTable out;
  out.ids = table.ids;
  out.covariate_names = names;
  out.subjects = table.subjects;
  for (auto& s : out.subjects) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) x[static_cast<Eigen::Index>(k)] = s.covariates[cols[k]];
    s.covariates = x;
  }
  return out;
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& d) {
  const auto names = report_names(d.n_regions(), d.covariate_names, true);
  out << "chain,iteration,parameter,value\n";
  for (std::size_t c = 0; c < d.chains.size(); ++c)
    for (const Draw& draw : d.chains[c].draws) {
      const std::string prefix = std::to_string(c + 1) + "," + std::to_string(draw.iteration) + ",";
      out << prefix << "lp__," << format_double(draw.log_posterior) << '\n';
      const auto v = report_values(draw.state, true);
      for (std::size_t p = 0; p < names.size(); ++p) out << prefix << quote_csv(names[p]) << ',' << format_double(v[p]) << '\n';
    }
}

PosteriorDraws read_draws_csv(std::istream& in) {
  std::string line;
  if (!read_line(in, line) || line != "chain,iteration,parameter,value")
    throw DataError("row 1: draws header must be chain,iteration,parameter,value");
  struct Raw {
    int chain, iteration;
    double lp = 0.0;
    std::vector<std::string> names;
    std::vector<double> values;
  };
  std::vector<Raw> raws;
  std::size_t row = 1;
  while (read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw DataError("row " + std::to_string(row) + ": expected 4 fields");
    const int chain = static_cast<int>(parse_int(cells[0], row, "chain"));
    const int iter = static_cast<int>(parse_int(cells[1], row, "iteration"));
    const double v = parse_double(cells[3], row, "value");
    if (chain < 1) throw DataError("row " + std::to_string(row) + ": chain must be >= 1");
    if (raws.empty() || raws.back().chain != chain || raws.back().iteration != iter) {
      if (!raws.empty() && (chain < raws.back().chain ||
                            (chain == raws.back().chain && iter <= raws.back().iteration)))
        throw DataError("row " + std::to_string(row) + ": draws out of order");
      raws.push_back(Raw{chain, iter, 0.0, {}, {}});
    }
    if (cells[2] == "lp__") raws.back().lp = v;
    else {
      raws.back().names.push_back(cells[2]);
      raws.back().values.push_back(v);
    }
  }
  if (raws.empty()) throw DataError("draws file has no draws");
  const auto& names = raws.front().names;
  std::vector<std::string> covariates;
  const std::string beta_prefix = "beta[FR,";
  int n_regions = 0;
  for (const auto& n : names) {
    if (n.rfind(beta_prefix, 0) == 0) covariates.push_back(n.substr(beta_prefix.size(), n.size() - beta_prefix.size() - 1));
    if (n.rfind("b[FR,", 0) == 0) ++n_regions;
  }
  if (report_names(n_regions, covariates, true) != names)
    throw DataError("draws file parameters do not form a complete model state");
  PosteriorDraws d;
  d.covariate_names = covariates;
  for (const auto& r : raws) {
    if (r.names != names)
      throw DataError("chain " + std::to_string(r.chain) + " iteration " + std::to_string(r.iteration) +
                      ": parameter set differs from the first draw");
    while (static_cast<int>(d.chains.size()) < r.chain) d.chains.emplace_back();
    Draw draw;
    draw.chain = r.chain - 1;
    draw.iteration = r.iteration;
    draw.log_posterior = r.lp;
    try {
      draw.state = state_from_report(r.values, n_regions, static_cast<int>(covariates.size()));
      draw.state.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError("chain " + std::to_string(r.chain) + " iteration " + std::to_string(r.iteration) + ": " +
                      e.what());
    }
    d.chains[r.chain - 1].draws.push_back(std::move(draw));
  }
  return d;
}

nlohmann::ordered_json summary_json(const DiagnosticsReport& report, const PosteriorDraws& draws,
                                    const std::map<std::string, double>& centers) {
  nlohmann::ordered_json j;
  j["n_draws"] = draws.total_draws();
  j["n_chains"] = draws.chains.size();
  j["n_regions"] = draws.n_regions();
  j["covariates"] = draws.covariate_names;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& n : draws.covariate_names) c[n] = centers.count(n) ? centers.at(n) : 0.0;
  j["centers"] = c;

  nlohmann::ordered_json transitions = nlohmann::ordered_json::object();
  for (Transition t : kAllTransitions) {
    const std::string tn(transition_name(t));
    nlohmann::ordered_json tj;
    tj["alpha"] = stat_json(report.at("alpha[" + tn + "]"));
    tj["lambda"] = stat_json(report.at("lambda[" + tn + "]"));
    tj["beta0"] = stat_json(report.at("beta0[" + tn + "]"));
    nlohmann::ordered_json beta = nlohmann::ordered_json::object();
    for (const auto& n : draws.covariate_names) beta[n] = stat_json(report.at("beta[" + tn + "," + n + "]"));
    tj["beta"] = beta;
    transitions[tn] = tj;
  }
  j["transitions"] = transitions;

  nlohmann::ordered_json hyper;
  hyper["gamma"] = stat_json(report.at("gamma"));
  for (Transition t : kAllTransitions) {
    const std::string name = "tau[" + std::string(transition_name(t)) + "]";
    hyper[name] = stat_json(report.at(name));
  }
  for (const char* name : {"rho[FR,FD]", "rho[FR,RD]", "rho[FD,RD]"}) hyper[name] = stat_json(report.at(name));
  j["hyperparameters"] = hyper;

  nlohmann::ordered_json effects = nlohmann::ordered_json::object();
  for (Transition t : kAllTransitions) {
    const std::string tn(transition_name(t));
    std::vector<double> means;
    for (int k = 0; k < draws.n_regions(); ++k) means.push_back(report.at("b[" + tn + "," + std::to_string(k + 1) + "]").mean);
    effects[tn] = means;
  }
  j["region_effect_means"] = effects;

  nlohmann::ordered_json diag;
  diag["max_rhat"] = std::isnan(report.max_rhat()) ? nlohmann::ordered_json(nullptr)
                                                   : nlohmann::ordered_json(report.max_rhat());
  diag["notices"] = report.notices;
  nlohmann::ordered_json acc = nlohmann::ordered_json::array();
  for (const auto& [chain, block, rate] : report.acceptance)
    acc.push_back({{"chain", chain + 1}, {"block", block}, {"rate", rate}});
  diag["acceptance"] = acc;
  j["diagnostics"] = diag;
  return j;
}

nlohmann::ordered_json truth_json(const SimTruth& truth, const std::vector<std::string>& covariates) {
  nlohmann::ordered_json j;
  const ModelState& m = truth.state;
  nlohmann::ordered_json t = nlohmann::ordered_json::object();
  for (Transition tr : kAllTransitions) t[std::string(transition_name(tr))] = state_params_json(m[tr], covariates);
  j["transitions"] = t;
  j["gamma"] = m.mix.gamma;
  j["precisions"] = m.between.precisions;
  j["correlations"] = m.between.correlations;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (std::size_t l = 0; l < covariates.size(); ++l) c[covariates[l]] = truth.centers[l];
  j["centers"] = c;
  nlohmann::ordered_json e = nlohmann::ordered_json::object();
  for (Transition tr : kAllTransitions) {
    std::vector<double> col(m.effects.rows());
    for (Eigen::Index k = 0; k < m.effects.rows(); ++k) col[k] = m.effects(k, index(tr));
    e[std::string(transition_name(tr))] = col;
  }
  j["effects"] = e;
  return j;
}

void write_outcomes_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "region,label,time,measure,mean,sd,q025,q975\n";
  for (const auto& r : rows)
    out << r.region + 1 << ',' << quote_csv(r.label) << ',' << format_double(r.time) << ',' << measure_name(r.measure) << ','
        << format_double(r.mean) << ',' << format_double(r.sd) << ',' << format_double(r.q025) << ','
        << format_double(r.q975) << '\n';
}

SpatialGraph RunConfig::graph() const {
  if (grid) return SpatialGraph::grid(grid->first, grid->second);
  if (!std::filesystem::exists(adjacency))
    throw ConfigError("adjacency file not found: " + adjacency.string());
  return load_adjacency_file(adjacency, n_regions);
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base) {
  RunConfig c;
  Object o(j, "config");
  c.version = o.get<int>("version");
  if (c.version != 1) throw ConfigError("unsupported config version " + std::to_string(c.version));
  o.maybe("seed", c.seed);
  o.maybe("threads", c.threads);
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  if (o.has("paths")) {
    Object p(o.at("paths"), "paths");
    if (p.has("cohort")) c.cohort = resolve(p.get<std::string>("cohort"));
    if (p.has("adjacency")) c.adjacency = resolve(p.get<std::string>("adjacency"));
    if (p.has("output")) c.output = resolve(p.get<std::string>("output"));
  }
  if (o.has("grid")) {
    const auto g = o.get<std::vector<int>>("grid");
    if (g.size() != 2 || g[0] < 1 || g[1] < 1) throw ConfigError("grid must be [rows, cols] with positive entries");
    c.grid = std::make_pair(g[0], g[1]);
    c.n_regions = g[0] * g[1];
  }
  if (o.has("regions")) {
    const int k = o.get<int>("regions");
    if (k < 1) throw ConfigError("regions must be >= 1");
    if (c.grid && k != c.n_regions) throw ConfigError("regions disagrees with grid");
    c.n_regions = k;
  }
  if (!c.grid && !c.adjacency.empty() && c.n_regions == 0)
    throw ConfigError("config: 'regions' is required with an adjacency file");
  if (c.grid && !c.adjacency.empty()) throw ConfigError("config: give either grid or paths.adjacency");
  if (o.has("covariates")) {
    std::set<std::string> seen;
    for (const auto& cj : o.at("covariates")) {
      Object co(cj, "covariates[]");
      CovariateSchema s;
      s.name = co.get<std::string>("name");
      co.maybe("center", s.center);
      if (!seen.insert(s.name).second) throw ConfigError("duplicate covariate '" + s.name + "' in schema");
      c.covariates.push_back(s);
    }
  }
  if (o.has("prior")) c.prior = parse_prior(o.at("prior"));
  if (o.has("sampler")) c.sampler = parse_sampler(o.at("sampler"));
  if (o.has("simulate")) c.simulate = parse_simulate(o.at("simulate"));
  if (o.has("outcomes")) {
    Object oc(o.at("outcomes"), "outcomes");
    if (oc.has("profiles"))
      for (const auto& pj : oc.at("profiles")) {
        Object po(pj, "outcomes.profiles[]");
        ProfileRequest p;
        p.label = po.get<std::string>("label");
        po.maybe("values", p.values);
        c.profiles.push_back(p);
      }
    if (oc.has("requests"))
      for (const auto& rj : oc.at("requests")) {
        Object ro(rj, "outcomes.requests[]");
        OutcomeRequest r;
        try {
          r.measure = parse_measure(ro.get<std::string>("measure"));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        r.times = ro.get<std::vector<double>>("times");
        ro.maybe("s", r.s);
        if (ro.has("t12")) r.t12 = ro.get<double>("t12");
        OutcomeGrid g{r.measure, r.times, r.s, r.t12};
        try {
          g.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("outcomes: ") + e.what());
        }
        c.outcomes.push_back(r);
      }
    if (oc.has("regions"))
      for (int k : oc.get<std::vector<int>>("regions")) {
        if (k < 1 || (c.n_regions > 0 && k > c.n_regions)) throw ConfigError("outcomes.regions entry out of range");
        c.outcome_regions.push_back(k - 1);
      }
  }
  c.sampler.seed = c.seed;
  c.sampler.threads = c.threads;
  if (c.simulate) {
    c.simulate->seed = c.seed;
    c.simulate->threads = c.threads;
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

}  // namespace sidm
