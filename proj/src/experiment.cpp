#include "mvsim/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mvsim/error.hpp"
#include "mvsim/version.hpp"

namespace mvsim {

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass:
      return "PASS";
    case Verdict::kFail:
      return "FAIL";
    case Verdict::kNoisy:
      return "NOISY";
  }
  return "FAIL";
}

namespace {

std::size_t line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
  throw ConfigError(line_of(node), message);
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key, const char* what) {
  if (!node.IsScalar()) fail(node, "'" + key + "' must be " + what);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "'" + key + "' must be " + what);
  }
}

double real(const YAML::Node& node, const std::string& key) {
  const double v = scalar<double>(node, key, "a number");
  if (!std::isfinite(v)) fail(node, "'" + key + "' must be finite");
  return v;
}

std::size_t count(const YAML::Node& node, const std::string& key) {
  const auto text = scalar<std::string>(node, key, "a positive integer");
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    fail(node, "'" + key + "' must be a positive integer");
  }
  const auto v = scalar<std::uint64_t>(node, key, "a positive integer");
  if (v == 0) fail(node, "'" + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(kv.first, "unknown key '" + key + "'" + (where.empty() ? "" : " in " + where) +
                         " (allowed: " + list + ")");
    }
  }
}

void parse_params(const YAML::Node& node, ModelParams& p) {
  if (!node.IsMap()) fail(node, "'params' must be a mapping");
  reject_unknown(node, {"a", "bbar", "sigma0", "m0", "v0", "eta", "c", "clip"}, "params");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const double v = real(kv.second, key);
    if (key == "a") p.a = v;
    if (key == "bbar") p.bbar = v;
    if (key == "sigma0") p.sigma0 = v;
    if (key == "m0") p.m0 = v;
    if (key == "v0") p.v0 = v;
    if (key == "eta") p.eta = v;
    if (key == "c") p.c = v;
    if (key == "clip") p.clip = v;
  }
  if (p.v0 < 0.0) fail(node["v0"], "'v0' must be nonnegative");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) fail(node["eta"] ? node["eta"] : node, "'eta' must lie in (0, 1]");
  if (p.clip < 0.0) fail(node["clip"], "'clip' must be nonnegative");
}

void parse_replications(const YAML::Node& node, ReplicationPolicy& r) {
  if (node.IsScalar()) {
    if (node.as<std::string>() == "adaptive") {
      r.adaptive = true;
      return;
    }
    r.adaptive = false;
    r.count = count(node, "replications");
    if (r.count < 2) fail(node, "'replications' must be at least 2");
    return;
  }
  if (!node.IsMap()) fail(node, "'replications' must be an integer, 'adaptive' or a mapping");
  reject_unknown(node, {"adaptive", "count", "initial", "cap", "forecast_stop", "forecast_min",
                       "work_budget"},
                 "replications");
  r.adaptive = node["adaptive"] ? scalar<bool>(node["adaptive"], "adaptive", "true or false")
                                : !node["count"];
  if (node["count"]) r.count = count(node["count"], "count");
  if (node["initial"]) r.initial = count(node["initial"], "initial");
  if (node["cap"]) r.cap = count(node["cap"], "cap");
  if (node["forecast_stop"]) {
    r.forecast_stop = scalar<bool>(node["forecast_stop"], "forecast_stop", "true or false");
  }
  if (node["forecast_min"]) r.forecast_min = count(node["forecast_min"], "forecast_min");
  if (node["work_budget"]) {
    r.work_budget = real(node["work_budget"], "work_budget");
    if (!(r.work_budget >= 0.0)) fail(node["work_budget"], "'work_budget' must be nonnegative");
  }
  if (r.adaptive && (r.initial < 2 || r.cap < r.initial)) {
    fail(node, "adaptive replications need 2 <= initial <= cap");
  }
  if (!r.adaptive && r.count < 2) fail(node, "'count' must be at least 2");
}

ReferenceMode parse_reference(const YAML::Node& node) {
  const auto text = scalar<std::string>(node, "reference", "'exact' or 'fine:<factor>'");
  ReferenceMode mode;
  if (text == "exact") return mode;
  if (text.rfind("fine:", 0) == 0) {
    const auto digits = text.substr(5);
    if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
      mode.kind = ReferenceMode::Kind::kFine;
      mode.factor = std::stoul(digits);
      if (mode.factor >= 2) return mode;
    }
  }
  fail(node, "'reference' must be 'exact' or 'fine:<factor>' with factor >= 2");
}

ExperimentConfig parse_root(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError(line_of(root), "config must be a mapping");
  reject_unknown(root,
                 {"name", "model", "params", "functional", "estimator", "horizon", "sweep",
                  "replications", "seed", "output", "dimension", "reference", "finest_steps",
                  "t_eval", "noise_gate", "window"},
                 "");
  ExperimentConfig c;
  const auto required = [&](const char* key) {
    if (!root[key]) throw ConfigError(0, std::string("missing required key '") + key + "'");
    return root[key];
  };

  c.name = root["name"] ? scalar<std::string>(root["name"], "name", "a string") : "experiment";
  const auto model_node = required("model");
  c.model = scalar<std::string>(model_node, "model", "a model id");
  const CatalogEntry* entry = nullptr;
  try {
    entry = &find_model(c.model);
  } catch (const DomainError& e) {
    fail(model_node, e.what());
  }
  c.model = entry->id;
  c.params = entry->defaults;
  if (root["params"]) parse_params(root["params"], c.params);

  const auto est_node = required("estimator");
  try {
    c.estimator = parse_estimator_kind(scalar<std::string>(est_node, "estimator", "a string"));
  } catch (const DomainError& e) {
    fail(est_node, e.what());
  }
  const bool semigroup = c.estimator == EstimatorKind::kWeakSemigroup ||
                         c.estimator == EstimatorKind::kStrongSemigroup;
  if (root["functional"]) {
    c.functional = scalar<std::string>(root["functional"], "functional", "a functional id");
    try {
      make_functional(c.functional);
    } catch (const DomainError& e) {
      fail(root["functional"], e.what());
    }
    if (!semigroup) fail(root["functional"], "estimator " + to_string(c.estimator) +
                                                 " takes no functional");
  } else if (semigroup) {
    fail(est_node, "estimator " + to_string(c.estimator) + " needs a 'functional'");
  }

  if (root["horizon"]) {
    c.horizon = real(root["horizon"], "horizon");
    if (!(c.horizon > 0.0)) fail(root["horizon"], "'horizon' must be positive");
  }

  const auto sweep = required("sweep");
  if (!sweep.IsMap()) fail(sweep, "'sweep' must be a mapping with axis, values and fixed");
  reject_unknown(sweep, {"axis", "values", "fixed"}, "sweep");
  if (!sweep["axis"] || !sweep["values"] || !sweep["fixed"]) {
    fail(sweep, "'sweep' needs axis, values and fixed");
  }
  const auto axis = scalar<std::string>(sweep["axis"], "axis", "'h' or 'N'");
  if (axis == "h") {
    c.axis = RateAxis::kMesh;
  } else if (axis == "N") {
    c.axis = RateAxis::kParticles;
  } else {
    fail(sweep["axis"], "'axis' must be 'h' or 'N'");
  }
  const auto values = sweep["values"];
  if (!values.IsSequence() || values.size() == 0) {
    fail(values, "'values' must be a nonempty list of positive integers");
  }
  for (const auto& v : values) {
    c.values.push_back(count(v, "values"));
    if (c.values.size() > 1 && c.values.back() <= c.values[c.values.size() - 2]) {
      fail(v, "sweep values must be strictly increasing");
    }
  }
  c.fixed = count(sweep["fixed"], "fixed");

  if (root["replications"]) parse_replications(root["replications"], c.replications);
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed", "a nonnegative integer");
  if (root["output"]) c.output = scalar<std::string>(root["output"], "output", "a path");
  if (root["dimension"]) c.dimension = count(root["dimension"], "dimension");
  if (root["reference"]) c.reference = parse_reference(root["reference"]);
  if (root["finest_steps"]) c.finest_steps = count(root["finest_steps"], "finest_steps");
  if (root["t_eval"]) {
    c.t_eval = real(root["t_eval"], "t_eval");
    if (*c.t_eval < 0.0 || *c.t_eval > c.horizon) {
      fail(root["t_eval"], "'t_eval' must lie in [0, horizon]");
    }
  }
  if (root["noise_gate"]) {
    c.noise_gate = real(root["noise_gate"], "noise_gate");
    if (!(c.noise_gate > 0.0)) fail(root["noise_gate"], "'noise_gate' must be positive");
  }
  if (root["window"]) {
    const auto w = root["window"];
    if (!w.IsMap()) fail(w, "'window' must be a mapping with min and/or max");
    reject_unknown(w, {"min", "max"}, "window");
    if (w["min"]) c.slope_min = real(w["min"], "min");
    if (w["max"]) c.slope_max = real(w["max"], "max");
    if (c.slope_min > c.slope_max) fail(w, "window min exceeds max");
  }

  // Mesh consistency: one finest tableau must serve every n.
  const std::size_t largest = c.axis == RateAxis::kMesh ? c.values.back() : c.fixed;
  const bool fine =
      c.reference.kind == ReferenceMode::Kind::kFine && c.estimator == EstimatorKind::kStrongTrajectory;
  const std::size_t finest =
      c.finest_steps ? c.finest_steps : (fine ? largest * c.reference.factor : largest);
  const auto& mesh_node = c.axis == RateAxis::kMesh ? values : sweep["fixed"];
  const auto check_divides = [&](std::size_t n, const YAML::Node& node) {
    if (finest % n != 0) {
      fail(node, "n = " + std::to_string(n) + " does not divide the finest n = " +
                     std::to_string(finest) + "; every mesh must come from one tableau");
    }
  };
  if (c.axis == RateAxis::kMesh) {
    for (std::size_t k = 0; k < c.values.size(); ++k) check_divides(c.values[k], values[k]);
  } else {
    check_divides(c.fixed, mesh_node);
  }
  if (c.t_eval) {
    for (std::size_t k = 0; k < c.values.size(); ++k) {
      const std::size_t n = c.axis == RateAxis::kMesh ? c.values[k] : c.fixed;
      const double steps = *c.t_eval / c.horizon * static_cast<double>(n);
      if (std::abs(steps - std::round(steps)) > 1e-9 * static_cast<double>(n)) {
        fail(root["t_eval"], "'t_eval' is not a node of the mesh n = " + std::to_string(n));
      }
    }
  }
  const auto setup = entry->make(c.params);
  if (c.dimension != setup.model->dimension()) {
    fail(root["dimension"] ? root["dimension"] : model_node,
         "model '" + c.model + "' has dimension " + std::to_string(setup.model->dimension()));
  }
  return c;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0, e.msg);
  }
  return parse_root(root);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["model"] = c.model;
  j["params"] = {{"a", c.params.a},     {"bbar", c.params.bbar}, {"sigma0", c.params.sigma0},
                 {"m0", c.params.m0},   {"v0", c.params.v0},     {"eta", c.params.eta},
                 {"c", c.params.c},     {"clip", c.params.clip}};
  j["functional"] = c.functional.empty() ? nlohmann::ordered_json(nullptr)
                                         : nlohmann::ordered_json(c.functional);
  j["estimator"] = to_string(c.estimator);
  j["horizon"] = c.horizon;
  j["sweep"] = {{"axis", to_string(c.axis)}, {"values", c.values}, {"fixed", c.fixed}};
  const auto& r = c.replications;
  if (r.adaptive) {
    j["replications"] = {{"adaptive", true},
                         {"initial", r.initial},
                         {"cap", r.cap},
                         {"forecast_stop", r.forecast_stop},
                         {"forecast_min", r.forecast_min},
                         {"work_budget", r.work_budget}};
  } else {
    j["replications"] = {{"adaptive", false}, {"count", r.count}};
  }
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["dimension"] = c.dimension;
  j["reference"] = c.reference.kind == ReferenceMode::Kind::kExact
                       ? std::string("exact")
                       : "fine:" + std::to_string(c.reference.factor);
  j["finest_steps"] = c.finest_steps;
  j["t_eval"] = c.t_eval ? nlohmann::ordered_json(*c.t_eval) : nlohmann::ordered_json("sup");
  j["noise_gate"] = c.noise_gate;
  nlohmann::ordered_json window;
  window["min"] = c.slope_min > -1e300 ? nlohmann::ordered_json(c.slope_min) : nlohmann::ordered_json(nullptr);
  window["max"] = c.slope_max < 1e300 ? nlohmann::ordered_json(c.slope_max) : nlohmann::ordered_json(nullptr);
  j["window"] = window;
  return j;
}

SweepDesign make_design(const ExperimentConfig& c) {
  SweepDesign d;
  d.setup = find_model(c.model).make(c.params);
  if (!c.functional.empty()) d.functional = make_functional(c.functional);
  d.kind = c.estimator;
  d.horizon = c.horizon;
  d.axis = c.axis;
  d.values = c.values;
  d.fixed = c.fixed;
  d.finest_steps = c.finest_steps;
  d.reference = c.reference;
  d.t_eval = c.t_eval;
  d.seed = c.seed;
  d.replications = c.replications;
  d.noise_gate = c.noise_gate;
  return d;
}

namespace {

std::filesystem::path output_dir(const ExperimentConfig& c, const RunOptions& o) {
  if (o.output) return *o.output;
  if (!c.output.empty()) return c.output;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    return std::filesystem::path(env) / c.name;
  }
  return std::filesystem::path("mvsim-out") / c.name;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string csv_preamble(const nlohmann::ordered_json& config) {
  return std::string("# version: ") + std::string(kVersion) + "\n# config: " + config.dump() + "\n";
}

std::string window_text(const ExperimentConfig& c) {
  const auto bound = [](double v) { return std::abs(v) >= 1e300 ? std::string(v < 0 ? "-inf" : "inf") : format_double(v); };
  return "[" + bound(c.slope_min) + ", " + bound(c.slope_max) + "]";
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_artifacts(const ExperimentConfig& c, const nlohmann::ordered_json& config,
                     const ExperimentOutcome& outcome) {
  const auto& dir = outcome.output_dir;
  std::filesystem::create_directories(dir);
  const auto& sweep = outcome.sweep;

  std::string csv = csv_preamble(config) + error_point_csv_header() + "\n";
  for (const auto& p : sweep.points) csv += to_csv_row(p) + "\n";
  for (const auto& p : sweep.companions) csv += to_csv_row(p) + "\n";
  write_file(dir / "points.csv", csv);

  nlohmann::ordered_json points;
  points["version"] = kVersion;
  points["config"] = config;
  points["points"] = nlohmann::ordered_json::array();
  for (const auto& p : sweep.points) points["points"].push_back(to_json(p));
  points["companions"] = nlohmann::ordered_json::array();
  for (const auto& p : sweep.companions) points["companions"].push_back(to_json(p));
  write_file(dir / "points.json", points.dump(2) + "\n");

  nlohmann::ordered_json fit;
  fit["version"] = kVersion;
  fit["config"] = config;
  fit["verdict"] = to_string(outcome.verdict);
  fit["window"] = config["window"];
  fit["fit"] = outcome.fit ? to_json(*outcome.fit) : nlohmann::ordered_json(nullptr);
  fit["message"] = outcome.message;
  write_file(dir / "ratefit.json", fit.dump(2) + "\n");

  std::string plot = csv_preamble(config) +
                     "axis_value,log_axis,estimate,log_estimate,std_error,log_fit,clean\n";
  for (const auto& p : sweep.points) {
    const double x = c.axis == RateAxis::kMesh ? p.mesh : static_cast<double>(p.particles);
    const double ly = p.estimate > 0.0 ? std::log(p.estimate) : kNaN;
    const double lf = outcome.fit ? outcome.fit->intercept + outcome.fit->slope * std::log(x) : kNaN;
    plot += format_double(x) + "," + format_double(std::log(x)) + "," + format_double(p.estimate) +
            "," + format_double(ly) + "," + format_double(p.std_error) + "," + format_double(lf) +
            "," + (p.clean ? "1" : "0") + "\n";
  }
  write_file(dir / "plotdata.csv", plot);

  std::ostringstream s;
  s << "experiment: " << c.name << "\n"
    << "version: " << kVersion << "\n"
    << "generated: " << timestamp() << "\n"
    << "model: " << c.model << "  estimator: " << to_string(c.estimator)
    << (c.functional.empty() ? "" : "  functional: " + c.functional) << "\n\n";
  s << std::left << std::setw(8) << "N" << std::setw(8) << "n" << std::setw(24) << "estimate"
    << std::setw(24) << "std_error" << std::setw(8) << "R" << "clean\n";
  for (const auto& p : sweep.points) {
    s << std::setw(8) << p.particles << std::setw(8) << p.steps << std::setw(24)
      << format_double(p.estimate) << std::setw(24) << format_double(p.std_error) << std::setw(8)
      << p.replications << (p.clean ? "yes" : "no") << "\n";
  }
  s << "\n";
  if (outcome.fit) {
    s << "slope vs log " << to_string(c.axis) << ": " << format_double(outcome.fit->slope)
      << " +/- " << format_double(outcome.fit->slope_half_width) << " (95%)\n"
      << "noise ratio: " << format_double(outcome.fit->noise_ratio) << "\n";
  } else {
    s << "slope: not fitted\n";
  }
  s << "window: " << window_text(c) << "\n";
  if (!outcome.message.empty()) s << "note: " << outcome.message << "\n";
  s << "verdict: " << to_string(outcome.verdict) << "\n\nresolved config:\n"
    << config.dump(2) << "\n";
  write_file(dir / "summary.txt", s.str());
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& input, const RunOptions& options) {
  ExperimentConfig c = input;
  if (options.seed) c.seed = *options.seed;
  ExperimentOutcome outcome;
  outcome.output_dir = output_dir(c, options);
  const auto config = to_json(c);

#ifdef _OPENMP
  if (options.workers > 0) omp_set_num_threads(options.workers);
#endif

  ProgressFn progress;
  if (!options.quiet) progress = [](const std::string& line) { std::cerr << line << "\n"; };

  try {
    outcome.sweep = run_sweep(make_design(c), progress);
  } catch (const IntegrationError& e) {
    outcome.exit_code = 3;
    outcome.verdict = Verdict::kFail;
    outcome.message = std::string("integration error: ") + e.what();
    write_artifacts(c, config, outcome);
    return outcome;
  } catch (const UnsupportedModelError& e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
    return outcome;
  } catch (const DomainError& e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
    return outcome;
  }

  std::vector<ErrorPoint> clean;
  for (const auto& p : outcome.sweep.points) {
    if (p.clean) clean.push_back(p);
  }
  if (clean.size() >= 4) outcome.fit = fit_rate(clean, c.axis);

  if (outcome.sweep.budget_exhausted) {
    outcome.verdict = Verdict::kNoisy;
    outcome.exit_code = 4;
    outcome.message = std::to_string(outcome.sweep.points.size() - clean.size()) +
                      " design point(s) failed the noise gate within the replication budget";
  } else if (!outcome.fit) {
    outcome.verdict = Verdict::kPass;
    outcome.exit_code = 0;
    outcome.message = "fewer than 4 design points; no rate fitted";
  } else {
    const double s = outcome.fit->slope;
    const bool inside = s >= c.slope_min && s <= c.slope_max;
    outcome.verdict = inside && outcome.fit->clean ? Verdict::kPass : Verdict::kFail;
    outcome.exit_code = outcome.verdict == Verdict::kPass ? 0 : 1;
    if (!inside) outcome.message = "slope outside the window " + window_text(c);
  }
  write_artifacts(c, config, outcome);
  return outcome;
}

}  // namespace mvsim
