#include "fvd/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace fvd {
namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(fmt::format("config error at {}: {}", path, why));
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::uint64_t as_u64(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(path, "expected a non-negative integer");
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(path, "integer out of range");
  }
  return static_cast<int>(v);
}

bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::vector<double> as_doubles(const Json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
    out.push_back(as_double(j[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

State as_state(const Json& j, const std::string& path) {
  const auto v = as_doubles(j, path);
  if (v.empty()) fail(path, "expected a nonempty array");
  return Eigen::Map<const State>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json state_json(const State& s) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back(s[i]);
  return out;
}

/// Reads keys from one JSON object and rejects the ones never asked for.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return join(path_, key); }
  const std::string& path() const { return path_; }

  double number(const std::string& key, double def) {
    const Json* v = find(key);
    return v ? as_double(*v, at(key)) : def;
  }
  std::size_t count(const std::string& key, std::size_t def) {
    const Json* v = find(key);
    return v ? static_cast<std::size_t>(as_u64(*v, at(key))) : def;
  }
  int integer(const std::string& key, int def) {
    const Json* v = find(key);
    return v ? as_int(*v, at(key)) : def;
  }
  bool flag(const std::string& key, bool def) {
    const Json* v = find(key);
    return v ? as_bool(*v, at(key)) : def;
  }
  std::string text(const std::string& key, const std::string& def) {
    const Json* v = find(key);
    return v ? as_string(*v, at(key)) : def;
  }
  const Json& require(const std::string& key) {
    const Json* v = find(key);
    if (!v) fail(at(key), "required key is missing");
    return *v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(at(key), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

GaussianMixture parse_prior(const Json& j, const std::string& path) {
  Reader r(j, path);
  const auto weights = as_doubles(r.require("weights"), r.at("weights"));
  std::vector<State> means;
  std::vector<State> vars;
  const Json& jm = as_array(r.require("means"), r.at("means"));
  const Json& jv = as_array(r.require("variances"), r.at("variances"));
  for (std::size_t i = 0; i < jm.size(); ++i) {
    means.push_back(as_state(jm[i], fmt::format("{}[{}]", r.at("means"), i)));
  }
  for (std::size_t i = 0; i < jv.size(); ++i) {
    vars.push_back(as_state(jv[i], fmt::format("{}[{}]", r.at("variances"), i)));
  }
  r.finish();
  try {
    return GaussianMixture(weights, means, vars);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Json prior_json(const GaussianMixture& g) {
  Json means = Json::array();
  Json vars = Json::array();
  for (const auto& m : g.means()) means.push_back(state_json(m));
  for (const auto& v : g.variances()) vars.push_back(state_json(v));
  return {{"weights", g.weights()}, {"means", means}, {"variances", vars}};
}

RewardSpec parse_reward(const Json& j, const std::string& path, std::size_t dim) {
  Reader r(j, path);
  const std::string kind = as_string(r.require("kind"), r.at("kind"));
  try {
    if (kind == "quadratic") {
      const Json* t = r.find("target");
      QuadraticReward q{t ? as_state(*t, r.at("target")) : State::Zero(
                                static_cast<Eigen::Index>(dim)),
                        r.number("scale", 1.0)};
      r.finish();
      return RewardSpec{q};
    }
    if (kind == "class_logit") {
      ClassLogitReward c;
      const Json& jc = as_array(r.require("classes"), r.at("classes"));
      for (std::size_t i = 0; i < jc.size(); ++i) {
        c.classes.push_back(parse_prior(jc[i], fmt::format("{}[{}]", r.at("classes"), i)));
      }
      if (const Json* p = r.find("class_priors")) {
        c.class_priors = as_doubles(*p, r.at("class_priors"));
      } else {
        c.class_priors.assign(c.classes.size(),
                              c.classes.empty() ? 0.0 : 1.0 / static_cast<double>(c.classes.size()));
      }
      c.target_class = r.count("target_class", 0);
      r.finish();
      return RewardSpec{c};
    }
    if (kind == "tabulated") {
      TabulatedReward t{as_doubles(r.require("grid"), r.at("grid")),
                        as_doubles(r.require("values"), r.at("values"))};
      r.finish();
      return RewardSpec{t};
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
  fail(r.at("kind"), fmt::format("unknown reward kind '{}' (quadratic, class_logit, tabulated)", kind));
}

Json reward_json(const RewardSpec& spec) {
  return std::visit(
      [](const auto& k) -> Json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, QuadraticReward>) {
          return {{"kind", "quadratic"}, {"target", state_json(k.target)}, {"scale", k.scale}};
        } else if constexpr (std::is_same_v<K, ClassLogitReward>) {
          Json classes = Json::array();
          for (const auto& c : k.classes) classes.push_back(prior_json(c));
          return {{"kind", "class_logit"},
                  {"classes", classes},
                  {"class_priors", k.class_priors},
                  {"target_class", k.target_class}};
        } else {
          return {{"kind", "tabulated"}, {"grid", k.grid}, {"values", k.values}};
        }
      },
      spec.kind());
}

Method parse_method(const std::string& s, const std::string& path) {
  if (s == "fvd") return Method::kFvd;
  if (s == "smc_multinomial") return Method::kSmcMultinomial;
  fail(path, fmt::format("unknown method '{}' (fvd, smc_multinomial)", s));
}

TerminalMode parse_terminal(const std::string& s, const std::string& path) {
  if (s == "temperature_subsample") return TerminalMode::kTemperatureSubsample;
  if (s == "terminal_correction_reweight") return TerminalMode::kTerminalCorrectionReweight;
  fail(path, fmt::format(
                 "unknown terminal_mode '{}' (temperature_subsample, terminal_correction_reweight)",
                 s));
}

constexpr std::size_t kDefaultBarriers = 4;

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

}  // namespace

RunConfig run_config_from_json(const Json& j, const std::string& where) {
  Reader r(j, where);
  RunConfig cfg;
  cfg.K = r.count("K", cfg.K);

  if (const Json* s = r.find("schedule")) {
    Reader rs(*s, r.at("schedule"));
    cfg.schedule.steps = rs.integer("steps", cfg.schedule.steps);
    cfg.schedule.train_steps = rs.integer("train_steps", cfg.schedule.train_steps);
    cfg.schedule.beta_start = rs.number("beta_start", cfg.schedule.beta_start);
    cfg.schedule.beta_end = rs.number("beta_end", cfg.schedule.beta_end);
    rs.finish();
  }
  try {
    (void)cfg.schedule.build();
  } catch (const Error& e) {
    fail(r.at("schedule"), e.what());
  }

  if (const Json* p = r.find("prior")) cfg.prior = parse_prior(*p, r.at("prior"));
  if (const Json* rw = r.find("reward")) {
    cfg.reward = parse_reward(*rw, r.at("reward"), cfg.prior.dim());
  } else {
    cfg.reward = RewardSpec{QuadraticReward{
        State::Zero(static_cast<Eigen::Index>(cfg.prior.dim())), 1.0}};
  }

  std::size_t n_resample = kDefaultBarriers;
  std::optional<std::vector<int>> explicit_steps;
  if (const Json* p = r.find("potential")) {
    Reader rp(*p, r.at("potential"));
    cfg.potential.lambda = rp.number("lambda", cfg.potential.lambda);
    const bool has_n = rp.find("n_resample") != nullptr;
    n_resample = rp.count("n_resample", n_resample);
    if (const Json* st = rp.find("resample_steps")) {
      if (has_n) fail(rp.path(), "give n_resample or resample_steps, not both");
      std::vector<int> steps;
      for (std::size_t i = 0; i < as_array(*st, rp.at("resample_steps")).size(); ++i) {
        steps.push_back(as_int((*st)[i], fmt::format("{}[{}]", rp.at("resample_steps"), i)));
      }
      explicit_steps = std::move(steps);
    }
    rp.finish();
  }
  try {
    cfg.potential.resample_steps =
        explicit_steps ? normalize_resample_steps(*explicit_steps, cfg.schedule.steps)
                       : default_resample_steps(cfg.schedule.steps, n_resample);
  } catch (const Error& e) {
    fail(r.at("potential"), e.what());
  }

  if (const Json* c = r.find("controller")) {
    Reader rc(*c, r.at("controller"));
    auto& ctl = cfg.controller;
    ctl.alpha_star = rc.number("alpha_star", ctl.alpha_star);
    ctl.eta0 = rc.number("eta0", ctl.eta0);
    ctl.gamma = rc.number("gamma", ctl.gamma);
    ctl.lambda_min = rc.number("lambda_min", ctl.lambda_min);
    ctl.lambda_max = rc.number("lambda_max", ctl.lambda_max);
    ctl.delta_floor = rc.number("delta_floor", ctl.delta_floor);
    ctl.enabled = rc.flag("enabled", ctl.enabled);
    rc.finish();
  }

  cfg.rebirth_eta = r.number("rebirth_eta", cfg.rebirth_eta);
  cfg.alpha_max = r.number("alpha_max", cfg.alpha_max);
  cfg.tau = r.number("tau", cfg.tau);
  cfg.n_eval = r.count("n_eval", cfg.n_eval);
  cfg.method = parse_method(r.text("method", to_string(cfg.method)), r.at("method"));
  cfg.terminal_mode = parse_terminal(
      r.text("terminal_mode", to_string(cfg.terminal_mode)), r.at("terminal_mode"));
  if (const Json* s = r.find("seed")) cfg.seed = as_u64(*s, r.at("seed"));
  r.finish();

  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return cfg;
}

Json run_config_to_json(const RunConfig& cfg) {
  const auto& c = cfg.controller;
  return {
      {"K", cfg.K},
      {"schedule",
       {{"steps", cfg.schedule.steps},
        {"train_steps", cfg.schedule.train_steps},
        {"beta_start", cfg.schedule.beta_start},
        {"beta_end", cfg.schedule.beta_end}}},
      {"prior", prior_json(cfg.prior)},
      {"reward", reward_json(cfg.reward)},
      {"potential",
       {{"lambda", cfg.potential.lambda},
        {"resample_steps", cfg.potential.resample_steps}}},
      {"controller",
       {{"alpha_star", c.alpha_star},
        {"eta0", c.eta0},
        {"gamma", c.gamma},
        {"lambda_min", c.lambda_min},
        {"lambda_max", c.lambda_max},
        {"delta_floor", c.delta_floor},
        {"enabled", c.enabled}}},
      {"rebirth_eta", cfg.rebirth_eta},
      {"alpha_max", cfg.alpha_max},
      {"tau", cfg.tau},
      {"n_eval", cfg.n_eval},
      {"method", to_string(cfg.method)},
      {"terminal_mode", to_string(cfg.terminal_mode)},
      {"seed", cfg.seed},
  };
}

ExperimentConfig parse_experiment(const std::string& text) {
  Json root;
  try {
    std::vector<std::set<std::string>> open_keys;
    root = Json::parse(text, [&](int, Json::parse_event_t ev, Json& parsed) {
      if (ev == Json::parse_event_t::object_start) {
        open_keys.emplace_back();
      } else if (ev == Json::parse_event_t::object_end) {
        open_keys.pop_back();
      } else if (ev == Json::parse_event_t::key) {
        const auto key = parsed.get<std::string>();
        if (!open_keys.back().insert(key).second) {
          throw ConfigError(fmt::format("config error: duplicate key '{}'", key));
        }
      }
      return true;
    });
  } catch (const Json::parse_error& e) {
    throw ConfigError(fmt::format("config syntax error at line {}: {}",
                                  line_of(text, e.byte), e.what()));
  }

  ExperimentConfig exp;
  Reader r(root, "");
  bool run_has_seed = false;
  if (const Json* run = r.find("run")) {
    if (!run->is_object()) fail("run", "expected an object");
    exp.run_template = *run;
    run_has_seed = run->contains("seed");
  }
  if (const Json* sw = r.find("sweep")) {
    Reader rs(*sw, "sweep");
    for (const auto& [path, values] : sw->items()) {
      (void)rs.find(path);
      if (!values.is_array() || values.empty()) {
        fail(rs.at(path), "expected a nonempty array of values");
      }
      if (path.empty()) fail("sweep", "empty parameter path");
      exp.sweep[path] = std::vector<Json>(values.begin(), values.end());
    }
  }
  if (const Json* s = r.find("seeds")) {
    if (run_has_seed) fail("seeds", "give seeds or run.seed, not both");
    exp.seeds.clear();
    for (std::size_t i = 0; i < as_array(*s, "seeds").size(); ++i) {
      exp.seeds.push_back(as_u64((*s)[i], fmt::format("seeds[{}]", i)));
    }
    if (exp.seeds.empty()) fail("seeds", "at least one seed is required");
    std::set<std::uint64_t> uniq(exp.seeds.begin(), exp.seeds.end());
    if (uniq.size() != exp.seeds.size()) fail("seeds", "seeds must be distinct");
  } else if (run_has_seed) {
    exp.seeds = {as_u64(exp.run_template["seed"], "run.seed")};
  }
  exp.output_dir = r.text("output_dir", exp.output_dir);
  if (const Json* m = r.find("metrics")) {
    exp.metrics.clear();
    const auto known = all_metric_names();
    for (std::size_t i = 0; i < as_array(*m, "metrics").size(); ++i) {
      const auto path = fmt::format("metrics[{}]", i);
      auto name = as_string((*m)[i], path);
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        fail(path, fmt::format("unknown metric '{}'", name));
      }
      exp.metrics.push_back(std::move(name));
    }
  }
  exp.record_wall_time = r.flag("record_wall_time", exp.record_wall_time);
  if (const Json* o = r.find("oracle_lambda"); o && !o->is_null()) {
    exp.oracle_lambda = as_double(*o, "oracle_lambda");
  }
  r.finish();

  (void)expand_sweep(exp);
  return exp;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str());
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& exp) {
  std::vector<std::pair<std::string, const std::vector<Json>*>> axes;
  std::size_t total = 1;
  for (const auto& [path, values] : exp.sweep) {
    axes.emplace_back(path, &values);
    total *= values.size();
  }
  std::vector<SweepPoint> points;
  points.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    SweepPoint pt;
    pt.index = idx;
    Json run = exp.run_template;
    std::size_t rem = idx;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& [path, values] = axes[a];
      const Json& value = (*values)[rem % values->size()];
      rem /= values->size();
      std::string pointer = "/" + path;
      std::replace(pointer.begin(), pointer.end(), '.', '/');
      try {
        run[Json::json_pointer(pointer)] = value;
      } catch (const Json::exception&) {
        fail("sweep." + path, "path does not name a settable field of run");
      }
      pt.assignments[path] = value;
    }
    try {
      pt.config = run_config_from_json(run, "run");
    } catch (const ConfigError& e) {
      if (axes.empty()) throw;
      throw ConfigError(fmt::format("sweep point {}: {}", idx, e.what()));
    }
    points.push_back(std::move(pt));
  }
  return points;
}

}  // namespace fvd
