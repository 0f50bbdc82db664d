// Command-line front end: instance generation, exact solves, stochastic
// runs, and ODE integration of the underlying saddle-point dynamics.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dgtd/harness.hpp"
#include "json.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

namespace fs = std::filesystem;
using nlohmann::json;

/// Default output directory: $DGTD_OUTPUT_DIR or the current directory.
fs::path output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DGTD_OUTPUT_DIR")) return env;
  return ".";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw dgtd::IoError("cannot create directory: " + dir.string());
}

dgtd::RunConfig resolve_config(const std::string& config_path,
                               const std::string& preset) {
  if (!config_path.empty() && !preset.empty())
    throw dgtd::ConfigError("give either --config or --preset, not both");
  if (!config_path.empty()) return dgtd::RunConfig::load(config_path);
  if (!preset.empty()) return dgtd::preset_by_name(preset);
  throw dgtd::ConfigError("need --config FILE or --preset NAME");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw dgtd::IoError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw dgtd::IoError("write failed: " + path.string());
}

int cmd_gen(int n_states, int n_agents, std::uint64_t seed, double gamma,
            const std::string& out_flag) {
  const fs::path dir = output_dir(out_flag);
  ensure_dir(dir);

  dgtd::Rng rng(seed);
  dgtd::Rng reward_rng(seed + 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd table(n_agents, n_states);
  for (int i = 0; i < n_agents; ++i)
    for (int s = 0; s < n_states; ++s) table(i, s) = normal(reward_rng);

  dgtd::MarkovRewardProcess mrp = dgtd::random_mrp(
      n_states, n_agents, dgtd::RewardTable{table}, gamma, rng);

  dgtd::save_matrix((dir / "transition.txt").string(), mrp.P());
  dgtd::save_matrix((dir / "rewards.txt").string(), table);

  dgtd::RunConfig cfg;
  cfg.instance = dgtd::RunConfig::InstanceKind::Files;
  cfg.n_states = n_states;
  cfg.n_agents = n_agents;
  cfg.instance_seed = seed;
  cfg.gamma = gamma;
  cfg.transition_file = "transition.txt";
  cfg.rewards_file = "rewards.txt";
  cfg.graph = "path:" + std::to_string(n_agents);
  cfg.save((dir / "config.json").string());

  std::cout << "wrote " << (dir / "transition.txt").string() << ", "
            << (dir / "rewards.txt").string() << ", "
            << (dir / "config.json").string() << '\n';
  return 0;
}

int cmd_solve(const std::string& config_path, const std::string& preset) {
  dgtd::RunConfig cfg = resolve_config(config_path, preset);
  dgtd::Experiment exp = dgtd::build_experiment(cfg);
  dgtd::SaddleSystem sys =
      dgtd::assemble_saddle_system(exp.mrp, exp.features, exp.dist.d, exp.net);
  dgtd::StationarySet star =
      dgtd::stationary_set(sys, exp.mrp, exp.features, exp.dist.d, exp.net);

  json j;
  auto vec = [](const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  j["w_star"] = vec(star.w_single);
  json theta = json::array();
  for (int i = 0; i < sys.n_agents; ++i)
    theta.push_back(vec(star.theta_star.segment(i * sys.q, sys.q)));
  j["theta_star"] = theta;
  j["kkt_residual"] = dgtd::kkt_residual(star.stacked(), sys);
  j["stationary_multiplier_residual"] =
      (sys.L_bar * star.mu_particular - sys.B_bar.transpose() * star.theta_star)
          .norm();

  json per_agent = json::array();
  double total = 0.0;
  for (int i = 0; i < sys.n_agents; ++i) {
    const double v = dgtd::mspbe(star.w_single, exp.mrp, exp.features,
                                 exp.dist.d, exp.mrp.reward(i));
    per_agent.push_back(v);
    total += v;
  }
  j["mspbe_per_agent"] = per_agent;
  j["sum_mspbe"] = total;
  j["config"] = json::parse(cfg.to_json());

  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& preset,
            const std::string& out_flag, long iterations_override,
            std::int64_t seed_override, bool no_projection) {
  dgtd::RunConfig cfg = resolve_config(config_path, preset);
  if (iterations_override > 0) cfg.iterations = iterations_override;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (no_projection) cfg.projection = false;

  const fs::path dir = output_dir(out_flag);
  ensure_dir(dir);

  dgtd::Experiment exp = dgtd::build_experiment(cfg);
  dgtd::MetricsSeries series = dgtd::run_experiment(exp);

  dgtd::export_metrics_csv(series, (dir / "metrics.csv").string());
  write_text(dir / "summary.json", dgtd::metrics_summary_json(series, cfg) + "\n");
  cfg.save((dir / "config.json").string());

  const auto& last = series.records.back();
  std::cout << "k=" << last.k << " consensus_err=" << last.consensus_err
            << " dist_w_star=" << last.dist_w_star
            << " sum_mspbe=" << last.sum_mspbe
            << " kkt_residual=" << last.kkt_residual << '\n'
            << "wrote " << (dir / "metrics.csv").string() << ", "
            << (dir / "summary.json").string() << '\n';
  return 0;
}

int cmd_ode(const std::string& config_path, const std::string& preset,
            const std::string& out_flag, double step, double t_end,
            bool projected, int record_every, std::uint64_t seed,
            double init_stddev) {
  dgtd::RunConfig cfg = resolve_config(config_path, preset);
  const fs::path dir = output_dir(out_flag);
  ensure_dir(dir);

  dgtd::Experiment exp = dgtd::build_experiment(cfg);
  dgtd::SaddleSystem sys =
      dgtd::assemble_saddle_system(exp.mrp, exp.features, exp.dist.d, exp.net);
  dgtd::StationarySet star =
      dgtd::stationary_set(sys, exp.mrp, exp.features, exp.dist.d, exp.net);

  dgtd::Rng rng(seed);
  std::normal_distribution<double> normal(0.0, init_stddev);
  Eigen::VectorXd x0(sys.dim());
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = normal(rng);

  dgtd::OdeOptions opts;
  opts.step = step;
  opts.t_end = t_end;
  opts.record_every = record_every;
  if (projected) {
    if (exp.boxes)
      opts.projected = exp.boxes;
    else
      opts.projected = dgtd::BoxSet::symmetric(
          sys.dim(), cfg.radius_scale *
                         std::max(1.0, star.stacked().lpNorm<Eigen::Infinity>()));
    x0 = opts.projected->clamp(x0);
  }

  const auto traj = dgtd::integrate_ode(sys, x0, opts);
  const Eigen::VectorXd x_star = star.stacked();

  std::ostringstream os;
  os << "t,half_sq_dist_to_star,quad_form,dist_theta_v_w,mu_dist_to_F\n";
  os << std::setprecision(17);
  for (const auto& pt : traj)
    os << pt.t << ',' << 0.5 * (pt.x - x_star).squaredNorm() << ','
       << dgtd::lyapunov_quadratic_form(pt.x, sys) << ','
       << dgtd::dist_theta_v_w(pt.x, star, sys.block_dim()) << ','
       << dgtd::mu_dist_to_F(
              pt.x.segment(2 * sys.block_dim(), sys.block_dim()), sys, star)
       << '\n';
  write_text(dir / "ode.csv", os.str());

  const auto& last = traj.back();
  std::cout << "t=" << last.t << " dist_theta_v_w="
            << dgtd::dist_theta_v_w(last.x, star, sys.block_dim()) << '\n'
            << "wrote " << (dir / "ode.csv").string() << '\n';
  return 0;
}

int cmd_preset(const std::string& name, const std::string& out_flag) {
  dgtd::RunConfig cfg = dgtd::preset_by_name(name);
  std::cout << cfg.to_json() << '\n';
  if (!out_flag.empty()) {
    const fs::path dir = output_dir(out_flag);
    ensure_dir(dir);
    cfg.save((dir / (name + ".json")).string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed temporal-difference policy evaluation toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a seeded random instance");
  int g_states = 10, g_agents = 3;
  std::uint64_t g_seed = 0;
  double g_gamma = 0.5;
  std::string g_out;
  gen->add_option("--states", g_states, "Number of states")->check(CLI::Range(2, 100000));
  gen->add_option("--agents", g_agents, "Number of agents")->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "Instance seed");
  gen->add_option("--gamma", g_gamma, "Discount factor in (0,1)");
  gen->add_option("--out", g_out, "Output directory (default $DGTD_OUTPUT_DIR or .)");

  // solve
  auto* solve = app.add_subcommand("solve", "Exact solution and diagnostics as JSON");
  std::string s_config, s_preset;
  solve->add_option("--config", s_config, "Config JSON file");
  solve->add_option("--preset", s_preset, "Preset name (example1|example2)");

  // run
  auto* run = app.add_subcommand("run", "Stochastic distributed run; writes metrics CSV and summary JSON");
  std::string r_config, r_preset, r_out;
  long r_iters = 0;
  std::int64_t r_seed = -1;
  bool r_noproj = false;
  run->add_option("--config", r_config, "Config JSON file");
  run->add_option("--preset", r_preset, "Preset name (example1|example2)");
  run->add_option("--out", r_out, "Output directory (default $DGTD_OUTPUT_DIR or .)");
  run->add_option("--iterations", r_iters, "Override iteration count");
  run->add_option("--seed", r_seed, "Override run seed");
  run->add_flag("--no-projection", r_noproj, "Disable box projection");

  // ode
  auto* ode = app.add_subcommand("ode", "Integrate the mean dynamics; writes a trajectory CSV");
  std::string o_config, o_preset, o_out;
  double o_step = 1e-2, o_tend = 100.0, o_stddev = 1.0;
  bool o_proj = false;
  int o_every = 10;
  std::uint64_t o_seed = 0;
  ode->add_option("--config", o_config, "Config JSON file");
  ode->add_option("--preset", o_preset, "Preset name (example1|example2)");
  ode->add_option("--out", o_out, "Output directory (default $DGTD_OUTPUT_DIR or .)");
  ode->add_option("--step", o_step, "Integration step")->check(CLI::PositiveNumber);
  ode->add_option("--t-end", o_tend, "End time")->check(CLI::PositiveNumber);
  ode->add_flag("--projected", o_proj, "Clamp-after-step Euler with box constraints");
  ode->add_option("--record-every", o_every, "Record every n-th step")->check(CLI::PositiveNumber);
  ode->add_option("--seed", o_seed, "Seed for the random initial point");
  ode->add_option("--init-stddev", o_stddev, "Stddev of the random initial point");

  // preset
  auto* preset = app.add_subcommand("preset", "Print a resolved preset config");
  std::string p_name, p_out;
  preset->add_option("name", p_name, "example1 or example2")->required();
  preset->add_option("--out", p_out, "Also save NAME.json to this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(g_states, g_agents, g_seed, g_gamma, g_out);
    if (*solve) return cmd_solve(s_config, s_preset);
    if (*run) return cmd_run(r_config, r_preset, r_out, r_iters, r_seed, r_noproj);
    if (*ode)
      return cmd_ode(o_config, o_preset, o_out, o_step, o_tend, o_proj,
                     o_every, o_seed, o_stddev);
    if (*preset) return cmd_preset(p_name, p_out);
  } catch (const dgtd::DivergenceError& e) {
    std::cerr << "{\"error\":\"divergence\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitDivergence;
  } catch (const dgtd::IoError& e) {
    std::cerr << "{\"error\":\"io\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitIo;
  } catch (const dgtd::Error& e) {
    std::cerr << "{\"error\":\"config\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"internal\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return 1;
  }
  return 0;
}
