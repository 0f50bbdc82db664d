#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "dgtd/harness.hpp"

namespace {

using namespace dgtd;

struct BenchSetup {
  MarkovRewardProcess mrp;
  StationaryDist dist;
  FeatureMap features;
  CommNetwork net;

  static BenchSetup make(int n_states, int q, int n_agents) {
    Rng rng(1);
    MarkovRewardProcess mrp =
        random_mrp(n_states, n_agents, ConstantPerAgent{}, 0.5, rng);
    StationaryDist dist = stationary_distribution(mrp.P());
    FeatureMap features = rbf_features(
        RbfSpec::evenly_spaced(
            Eigen::VectorXd::LinSpaced(n_states, 0.0, n_states - 1.0), q),
        n_states);
    CommNetwork net = network_preset("star:" + std::to_string(n_agents));
    return {std::move(mrp), std::move(dist), std::move(features),
            std::move(net)};
  }
};

void BM_DistributedStep(benchmark::State& state) {
  BenchSetup s = BenchSetup::make(static_cast<int>(state.range(0)), 5,
                                  static_cast<int>(state.range(1)));
  DgtdProblem prob{s.mrp, s.dist, s.features, s.net, {},
                   StepSchedule::harmonic(1.0, 1000.0)};
  Rng rng(2);
  DgtdState st;
  st.x = StackedState::zero(s.net.n_agents(), s.features.n_features());
  for (auto _ : state) {
    dgtd_step(st, prob, rng);
    benchmark::DoNotOptimize(st.x.w);
  }
}
BENCHMARK(BM_DistributedStep)->Args({10, 5})->Args({50, 20})->Args({100, 20});

void BM_AssembleSystem(benchmark::State& state) {
  BenchSetup s = BenchSetup::make(static_cast<int>(state.range(0)), 5,
                                  static_cast<int>(state.range(1)));
  for (auto _ : state) {
    SaddleSystem sys =
        assemble_saddle_system(s.mrp, s.features, s.dist.d, s.net);
    benchmark::DoNotOptimize(sys.A);
  }
}
BENCHMARK(BM_AssembleSystem)->Args({10, 5})->Args({50, 20});

void BM_StationarySolve(benchmark::State& state) {
  BenchSetup s = BenchSetup::make(static_cast<int>(state.range(0)), 5,
                                  static_cast<int>(state.range(1)));
  SaddleSystem sys = assemble_saddle_system(s.mrp, s.features, s.dist.d, s.net);
  for (auto _ : state) {
    StationarySet star = stationary_set(sys, s.mrp, s.features, s.dist.d, s.net);
    benchmark::DoNotOptimize(star.w_single);
  }
}
BENCHMARK(BM_StationarySolve)->Args({10, 5})->Args({50, 20});

void BM_OdeStep(benchmark::State& state) {
  BenchSetup s = BenchSetup::make(10, 5, static_cast<int>(state.range(0)));
  SaddleSystem sys = assemble_saddle_system(s.mrp, s.features, s.dist.d, s.net);
  const double h = 2.0 / sys.A.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(sys.dim());
  for (auto _ : state) {
    Eigen::VectorXd k1 = -(sys.A * x + sys.b);
    Eigen::VectorXd k2 = -(sys.A * (x + 0.5 * h * k1) + sys.b);
    Eigen::VectorXd k3 = -(sys.A * (x + 0.5 * h * k2) + sys.b);
    Eigen::VectorXd k4 = -(sys.A * (x + h * k3) + sys.b);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_OdeStep)->Arg(5)->Arg(20);

void BM_StationaryDistribution(benchmark::State& state) {
  Rng rng(3);
  MarkovRewardProcess mrp = random_mrp(static_cast<int>(state.range(0)), 1,
                                       ConstantPerAgent{}, 0.5, rng);
  for (auto _ : state) {
    StationaryDist d = stationary_distribution(mrp.P());
    benchmark::DoNotOptimize(d.d);
  }
}
BENCHMARK(BM_StationaryDistribution)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
