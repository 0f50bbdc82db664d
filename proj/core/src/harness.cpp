#include "dgtd/harness.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace dgtd {

namespace {

using nlohmann::json;

std::string instance_name(RunConfig::InstanceKind k) {
  switch (k) {
    case RunConfig::InstanceKind::Example2Matrix: return "example2_matrix";
    case RunConfig::InstanceKind::Random: return "random";
    case RunConfig::InstanceKind::Files: return "files";
  }
  throw ConfigError("bad instance kind");
}

RunConfig::InstanceKind instance_from(const std::string& s) {
  if (s == "example2_matrix") return RunConfig::InstanceKind::Example2Matrix;
  if (s == "random") return RunConfig::InstanceKind::Random;
  if (s == "files") return RunConfig::InstanceKind::Files;
  throw ConfigError("unknown instance kind: " + s);
}

std::string reward_name(RunConfig::RewardKind k) {
  switch (k) {
    case RunConfig::RewardKind::ConstantAgentIndex: return "constant_agent_index";
    case RunConfig::RewardKind::BuySell: return "buy_sell";
    case RunConfig::RewardKind::Gaussian: return "gaussian";
  }
  throw ConfigError("bad reward kind");
}

RunConfig::RewardKind reward_from(const std::string& s) {
  if (s == "constant_agent_index") return RunConfig::RewardKind::ConstantAgentIndex;
  if (s == "buy_sell") return RunConfig::RewardKind::BuySell;
  if (s == "gaussian") return RunConfig::RewardKind::Gaussian;
  throw ConfigError("unknown reward kind: " + s);
}

std::string mode_name(SamplingMode m) {
  switch (m) {
    case SamplingMode::SharedIid: return "shared_iid";
    case SamplingMode::IndependentIid: return "independent_iid";
    case SamplingMode::SharedTrajectory: return "shared_trajectory";
  }
  throw ConfigError("bad sampling mode");
}

SamplingMode mode_from(const std::string& s) {
  if (s == "shared_iid") return SamplingMode::SharedIid;
  if (s == "independent_iid") return SamplingMode::IndependentIid;
  if (s == "shared_trajectory") return SamplingMode::SharedTrajectory;
  throw ConfigError("unknown sampling mode: " + s);
}

std::string theta_form_name(ThetaUpdateForm f) {
  return f == ThetaUpdateForm::Printed ? "printed" : "factored";
}

ThetaUpdateForm theta_form_from(const std::string& s) {
  if (s == "printed") return ThetaUpdateForm::Printed;
  if (s == "factored") return ThetaUpdateForm::Factored;
  throw ConfigError("unknown theta update form: " + s);
}

std::string init_name(RunConfig::InitKind k) {
  return k == RunConfig::InitKind::Zero ? "zero" : "gaussian";
}

RunConfig::InitKind init_from(const std::string& s) {
  if (s == "zero") return RunConfig::InitKind::Zero;
  if (s == "gaussian") return RunConfig::InitKind::Gaussian;
  throw ConfigError("unknown init kind: " + s);
}

Eigen::VectorXd state_values_for(const RunConfig& cfg) {
  Eigen::VectorXd v(cfg.n_states);
  if (cfg.state_value_lo == cfg.state_value_hi) {
    for (int s = 0; s < cfg.n_states; ++s) v(s) = static_cast<double>(s);
  } else {
    v = Eigen::VectorXd::LinSpaced(cfg.n_states, cfg.state_value_lo,
                                   cfg.state_value_hi);
  }
  return v;
}

}  // namespace

std::string RunConfig::to_json() const {
  json j;
  j["preset"] = preset;
  j["instance"] = instance_name(instance);
  j["n_states"] = n_states;
  j["n_agents"] = n_agents;
  j["instance_seed"] = instance_seed;
  j["transition_file"] = transition_file;
  j["rewards_file"] = rewards_file;
  j["reward"] = reward_name(reward);
  json th = json::array();
  for (const auto& [a, b] : buy_sell_thresholds) th.push_back({a, b});
  j["buy_sell_thresholds"] = th;
  j["state_value_lo"] = state_value_lo;
  j["state_value_hi"] = state_value_hi;
  j["q"] = q;
  j["rbf_width_scale"] = rbf_width_scale;
  j["features_file"] = features_file;
  j["gamma"] = gamma;
  j["graph"] = graph;
  j["schedule"]["kind"] =
      schedule.kind == StepSchedule::Kind::Harmonic ? "harmonic" : "constant";
  j["schedule"]["a"] = schedule.a;
  j["schedule"]["b"] = schedule.b;
  j["schedule"]["c"] = schedule.c;
  j["projection"] = projection;
  j["radius_scale"] = radius_scale;
  j["iterations"] = iterations;
  j["cadence"] = cadence;
  j["seed"] = seed;
  j["mode"] = mode_name(mode);
  j["theta_form"] = theta_form_name(theta_form);
  j["init"] = init_name(init);
  j["init_stddev"] = init_stddev;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    c.preset = j.value("preset", c.preset);
    c.instance = instance_from(j.value("instance", instance_name(c.instance)));
    c.n_states = j.value("n_states", c.n_states);
    c.n_agents = j.value("n_agents", c.n_agents);
    c.instance_seed = j.value("instance_seed", c.instance_seed);
    c.transition_file = j.value("transition_file", c.transition_file);
    c.rewards_file = j.value("rewards_file", c.rewards_file);
    c.reward = reward_from(j.value("reward", reward_name(c.reward)));
    if (j.contains("buy_sell_thresholds")) {
      c.buy_sell_thresholds.clear();
      for (const auto& pair : j["buy_sell_thresholds"])
        c.buy_sell_thresholds.emplace_back(pair.at(0).get<double>(),
                                           pair.at(1).get<double>());
    }
    c.state_value_lo = j.value("state_value_lo", c.state_value_lo);
    c.state_value_hi = j.value("state_value_hi", c.state_value_hi);
    c.q = j.value("q", c.q);
    c.rbf_width_scale = j.value("rbf_width_scale", c.rbf_width_scale);
    c.features_file = j.value("features_file", c.features_file);
    c.gamma = j.value("gamma", c.gamma);
    c.graph = j.value("graph", c.graph);
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      const std::string kind = s.value("kind", "harmonic");
      if (kind == "harmonic")
        c.schedule.kind = StepSchedule::Kind::Harmonic;
      else if (kind == "constant")
        c.schedule.kind = StepSchedule::Kind::Constant;
      else
        throw ConfigError("unknown schedule kind: " + kind);
      c.schedule.a = s.value("a", c.schedule.a);
      c.schedule.b = s.value("b", c.schedule.b);
      c.schedule.c = s.value("c", c.schedule.c);
    }
    c.projection = j.value("projection", c.projection);
    c.radius_scale = j.value("radius_scale", c.radius_scale);
    c.iterations = j.value("iterations", c.iterations);
    c.cadence = j.value("cadence", c.cadence);
    c.seed = j.value("seed", c.seed);
    c.mode = mode_from(j.value("mode", mode_name(c.mode)));
    c.theta_form =
        theta_form_from(j.value("theta_form", theta_form_name(c.theta_form)));
    c.init = init_from(j.value("init", init_name(c.init)));
    c.init_stddev = j.value("init_stddev", c.init_stddev);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  RunConfig c = from_json(ss.str());

  // Relative file references resolve against the config's directory, so a
  // generated bundle works from anywhere.
  namespace fs = std::filesystem;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](std::string& file) {
    if (!file.empty() && fs::path(file).is_relative())
      file = (base / file).string();
  };
  resolve(c.transition_file);
  resolve(c.rewards_file);
  resolve(c.features_file);
  if (c.graph.rfind('@', 0) == 0) {
    std::string g = c.graph.substr(1);
    resolve(g);
    c.graph = "@" + g;
  }
  return c;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << to_json() << '\n';
  if (!os) throw IoError("write failed: " + path);
}

void RunConfig::validate() const {
  if (n_states < 2) throw ConfigError("need at least two states");
  if (n_agents < 1) throw ConfigError("need at least one agent");
  if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("gamma must lie in (0,1)");
  if (q < 1) throw ConfigError("need at least one feature");
  if (q > n_states) throw ConfigError("more features than states");
  if (rbf_width_scale <= 0.0) throw ConfigError("rbf_width_scale must be positive");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (cadence < 1) throw ConfigError("cadence must be >= 1");
  if (radius_scale <= 0.0) throw ConfigError("radius_scale must be positive");
  if (init_stddev <= 0.0) throw ConfigError("init_stddev must be positive");
  if (schedule.kind == StepSchedule::Kind::Harmonic) {
    if (schedule.a <= 0.0 || schedule.b <= 0.0)
      throw ConfigError("harmonic schedule needs a > 0 and b > 0");
  } else if (schedule.c <= 0.0) {
    throw ConfigError("constant step must be positive");
  }
  if (instance == InstanceKind::Files &&
      (transition_file.empty() || rewards_file.empty()))
    throw ConfigError("file instance needs transition_file and rewards_file");
  if (instance == InstanceKind::Example2Matrix && n_states != 5)
    throw ConfigError("bundled 5-state matrix requires n_states = 5");
  if (reward == RewardKind::BuySell) {
    if (static_cast<int>(buy_sell_thresholds.size()) != n_agents)
      throw ConfigError("buy/sell rewards need one threshold pair per agent");
    for (const auto& [a, b] : buy_sell_thresholds)
      if (a > b) throw ConfigError("buy/sell thresholds need a <= b");
    if (state_value_lo >= state_value_hi)
      throw ConfigError("buy/sell rewards need state_value_lo < state_value_hi");
  }
}

Eigen::MatrixXd example2_transition(double* max_row_delta) {
  Eigen::MatrixXd P(5, 5);
  P << 0.2362, 0.0895, 0.3536, 0.1099, 0.2107,
       0.1821, 0.2719, 0.1553, 0.1217, 0.2689,
       0.1999, 0.0279, 0.2870, 0.1628, 0.3224,
       0.1149, 0.1723, 0.2726, 0.3747, 0.0656,
       0.2921, 0.1719, 0.0907, 0.1836, 0.2618;
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double s = P.row(i).sum();
    worst = std::max(worst, std::abs(s - 1.0));
    P.row(i) /= s;
  }
  if (max_row_delta) *max_row_delta = worst;
  return P;
}

RunConfig preset_example2() {
  RunConfig c;
  c.preset = "example2";
  c.instance = RunConfig::InstanceKind::Example2Matrix;
  c.n_states = 5;
  c.n_agents = 20;
  c.reward = RunConfig::RewardKind::ConstantAgentIndex;
  c.q = 3;
  c.gamma = 0.5;
  c.graph = "star:20";
  c.schedule = StepSchedule::harmonic(2.0, 1000.0);
  c.projection = true;
  c.iterations = 50000;
  c.cadence = 100;
  return c;
}

RunConfig preset_example1() {
  RunConfig c;
  c.preset = "example1";
  c.instance = RunConfig::InstanceKind::Random;
  c.n_states = 100;
  c.n_agents = 5;
  c.instance_seed = 1;
  c.reward = RunConfig::RewardKind::BuySell;
  c.buy_sell_thresholds = {{10.0, 30.0}, {10.0, 40.0}, {10.0, 50.0},
                           {10.0, 60.0}, {10.0, 70.0}};
  c.state_value_lo = 10.0;
  c.state_value_hi = 1000.0;
  c.q = 11;
  c.gamma = 0.5;
  c.graph = "example1";
  c.schedule = StepSchedule::harmonic(10.0, 1000.0);
  c.projection = false;
  c.iterations = 50000;
  c.cadence = 100;
  return c;
}

RunConfig preset_by_name(const std::string& name) {
  if (name == "example1") return preset_example1();
  if (name == "example2") return preset_example2();
  throw ConfigError("unknown preset: " + name);
}

Experiment build_experiment(const RunConfig& config) {
  config.validate();
  const Eigen::VectorXd values = state_values_for(config);

  auto reward_spec = [&]() -> RewardSpec {
    switch (config.reward) {
      case RunConfig::RewardKind::ConstantAgentIndex:
        return ConstantPerAgent{};
      case RunConfig::RewardKind::BuySell:
        return BuySellRule{config.buy_sell_thresholds, values};
      case RunConfig::RewardKind::Gaussian: {
        Rng rng(config.instance_seed + 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::MatrixXd table(config.n_agents, config.n_states);
        for (int i = 0; i < config.n_agents; ++i)
          for (int s = 0; s < config.n_states; ++s) table(i, s) = normal(rng);
        return RewardTable{table};
      }
    }
    throw ConfigError("bad reward kind");
  };

  auto make_mrp = [&]() -> MarkovRewardProcess {
    switch (config.instance) {
      case RunConfig::InstanceKind::Random: {
        Rng rng(config.instance_seed);
        return random_mrp(config.n_states, config.n_agents, reward_spec(),
                          config.gamma, rng);
      }
      case RunConfig::InstanceKind::Example2Matrix:
      case RunConfig::InstanceKind::Files: {
        Eigen::MatrixXd P =
            config.instance == RunConfig::InstanceKind::Example2Matrix
                ? example2_transition()
                : load_matrix(config.transition_file);
        std::vector<Eigen::VectorXd> rewards;
        if (config.instance == RunConfig::InstanceKind::Files) {
          Eigen::MatrixXd table = load_matrix(config.rewards_file);
          if (table.rows() != config.n_agents || table.cols() != P.rows())
            throw ConfigError("rewards file must be n_agents x n_states");
          for (int i = 0; i < config.n_agents; ++i)
            rewards.push_back(table.row(i).transpose());
        } else {
          switch (config.reward) {
            case RunConfig::RewardKind::ConstantAgentIndex:
              for (int i = 0; i < config.n_agents; ++i)
                rewards.push_back(Eigen::VectorXd::Constant(
                    P.rows(), static_cast<double>(i + 1)));
              break;
            case RunConfig::RewardKind::BuySell: {
              for (int i = 0; i < config.n_agents; ++i) {
                Eigen::VectorXd r(P.rows());
                const auto& [a, b] = config.buy_sell_thresholds[i];
                for (int s = 0; s < P.rows(); ++s)
                  r(s) = (values(s) >= a && values(s) <= b) ? -values(s)
                                                            : values(s);
                rewards.push_back(r);
              }
              break;
            }
            case RunConfig::RewardKind::Gaussian: {
              Rng rng(config.instance_seed + 0x9e3779b97f4a7c15ULL);
              std::normal_distribution<double> normal(0.0, 1.0);
              for (int i = 0; i < config.n_agents; ++i) {
                Eigen::VectorXd r(P.rows());
                for (int s = 0; s < P.rows(); ++s) r(s) = normal(rng);
                rewards.push_back(r);
              }
              break;
            }
          }
        }
        return MarkovRewardProcess(P, std::move(rewards), config.gamma);
      }
    }
    throw ConfigError("bad instance kind");
  };

  MarkovRewardProcess mrp = make_mrp();
  StationaryDist dist = stationary_distribution(mrp.P());

  FeatureMap features =
      config.features_file.empty()
          ? rbf_features(
                RbfSpec::evenly_spaced(values, config.q, config.rbf_width_scale),
                mrp.n_states())
          : FeatureMap(load_matrix(config.features_file));

  CommNetwork net =
      config.graph.rfind("@", 0) == 0
          ? build_network(config.n_agents, load_graph(config.graph.substr(1)))
          : network_preset(config.graph);
  if (net.n_agents() != config.n_agents)
    throw ConfigError("graph size does not match n_agents");

  std::optional<BoxSet> boxes;
  if (config.projection) {
    SaddleSystem sys = assemble_saddle_system(mrp, features, dist.d, net);
    StationarySet star = stationary_set(sys, mrp, features, dist.d, net);
    const double radius =
        config.radius_scale *
        std::max({star.theta_star.lpNorm<Eigen::Infinity>(),
                  star.mu_particular.lpNorm<Eigen::Infinity>(),
                  star.w_star.lpNorm<Eigen::Infinity>(), 1.0});
    boxes = BoxSet::symmetric(sys.dim(), radius);
  }

  return Experiment{std::move(mrp), std::move(dist), std::move(features),
                    std::move(net), std::move(boxes), config};
}

MetricsSeries run_experiment(const Experiment& exp) {
  const RunConfig& cfg = exp.config;
  DgtdProblem prob{exp.mrp,  exp.dist,     exp.features, exp.net,
                   exp.boxes, cfg.schedule, cfg.mode,     cfg.theta_form};

  RunSpec spec;
  spec.iterations = cfg.iterations;
  spec.cadence = cfg.cadence;
  spec.seed = cfg.seed;
  if (cfg.init == RunConfig::InitKind::Gaussian) {
    Rng rng(cfg.seed + 0x51f42d4c957f2dULL);
    std::normal_distribution<double> normal(0.0, cfg.init_stddev);
    spec.init =
        StackedState::zero(exp.net.n_agents(), exp.features.n_features());
    auto fill = [&](Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    };
    fill(spec.init.theta);
    fill(spec.init.v);
    fill(spec.init.mu);
    fill(spec.init.w);
  }
  return run_dgtd(prob, spec);
}

std::string metrics_csv(const MetricsSeries& series) {
  std::ostringstream os;
  os << "k,alpha,consensus_err,dist_w_star,sum_mspbe,kkt_residual\n";
  os << std::setprecision(17);
  for (const auto& r : series.records)
    os << r.k << ',' << r.alpha << ',' << r.consensus_err << ','
       << r.dist_w_star << ',' << r.sum_mspbe << ',' << r.kkt_residual << '\n';
  return os.str();
}

void export_metrics_csv(const MetricsSeries& series, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << metrics_csv(series);
  if (!os) throw IoError("write failed: " + path);
}

std::string metrics_summary_json(const MetricsSeries& series,
                                 const RunConfig& config) {
  if (series.records.empty()) throw Error("metrics series is empty");
  const MetricsRecord& last = series.records.back();
  json j;
  j["final"]["k"] = last.k;
  j["final"]["alpha"] = last.alpha;
  j["final"]["consensus_err"] = last.consensus_err;
  j["final"]["dist_w_star"] = last.dist_w_star;
  j["final"]["sum_mspbe"] = last.sum_mspbe;
  j["final"]["kkt_residual"] = last.kkt_residual;
  json w = json::array();
  for (Eigen::Index i = 0; i < series.w_star.size(); ++i)
    w.push_back(series.w_star(i));
  j["w_star"] = w;
  j["config"] = json::parse(config.to_json());
  return j.dump(2);
}

MetricsSeries parse_metrics_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw IoError("metrics CSV is empty");
  if (line != "k,alpha,consensus_err,dist_w_star,sum_mspbe,kkt_residual")
    throw IoError("unexpected metrics CSV header: " + line);

  MetricsSeries out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    MetricsRecord r;
    char comma = 0;
    if (!(ls >> r.k >> comma >> r.alpha >> comma >> r.consensus_err >> comma >>
          r.dist_w_star >> comma >> r.sum_mspbe >> comma >> r.kkt_residual))
      throw IoError("malformed metrics CSV row: " + line);
    out.records.push_back(r);
  }
  return out;
}

}  // namespace dgtd
