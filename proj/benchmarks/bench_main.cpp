#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "ouc/dynamics.hpp"
#include "ouc/hjb.hpp"
#include "ouc/semigroup.hpp"
#include "ouc/spectral_model.hpp"

namespace {

ouc::SpectralModel heat_model(int n) {
  Eigen::VectorXd mu(n), sigma(n), g(n);
  for (int k = 0; k < n; ++k) {
    mu[k] = double(k) * k;
    sigma[k] = 1.0;
    g[k] = std::pow(1.0 + mu[k], 0.3);
  }
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, 2);
  return ouc::build_model(mu, sigma, g, L, 0.3, 0.0, 3.5, 8.0, 2.0, 1);
}

void BM_CovarianceQt(benchmark::State& state) {
  const ouc::SpectralModel model = heat_model(int(state.range(0)));
  for (auto _ : state) {
    auto q = ouc::covariance_qt(model, 0.37);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_CovarianceQt)->Arg(8)->Arg(64)->Arg(512);

void BM_SamplePaths(benchmark::State& state) {
  const ouc::SpectralModel model = heat_model(8);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(8);
  const auto control = ouc::ControlProcess::constant(Eigen::VectorXd::Zero(2));
  const auto grid = ouc::uniform_grid(1.0, 128);
  for (auto _ : state) {
    double acc = 0.0;
    ouc::for_each_path(model, x0, control, grid, int(state.range(0)), 7,
                       [&](int, const ouc::PathView& view) {
                         acc += view.states(view.states.rows() - 1, 0);
                       });
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePaths)->Arg(256)->Arg(4096);

void BM_ApplySemigroupGaussHermite(benchmark::State& state) {
  const ouc::SpectralModel model = heat_model(8);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(8);
  a[0] = 1.0;
  a[1] = -0.5;
  const auto f = ouc::CylinderFunction::trig(a, 0.2, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(8);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 0.3);
  const auto scheme = ouc::SemigroupScheme::gauss_hermite(int(state.range(0)));
  for (auto _ : state) {
    double v = ouc::apply_semigroup(model, zero, f, 0.5, x, scheme);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ApplySemigroupGaussHermite)->Arg(8)->Arg(16)->Arg(32);

void BM_GGradientMc(benchmark::State& state) {
  const ouc::SpectralModel model = heat_model(8);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(8);
  a[0] = 0.8;
  a[2] = 0.4;
  const auto f = ouc::CylinderFunction::trig(a, 0.0, 1.0);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(8);
  for (auto _ : state) {
    auto est = ouc::g_gradient_semigroup(model, f, 0.4, x,
                                         int(state.range(0)), 11);
    benchmark::DoNotOptimize(est);
  }
}
BENCHMARK(BM_GGradientMc)->Arg(1000)->Arg(10000);

void BM_HjbSweep(benchmark::State& state) {
  const ouc::SpectralModel model = heat_model(8);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  w[0] = 1.0;
  const auto cost =
      ouc::make_gauss_well_cost(w, 1.0, ouc::Box::symmetric(2, 0.25));
  ouc::GridSpec grid;
  grid.m_lead = 1;
  grid.nodes_per_dim = int(state.range(0));
  ouc::SolveOptions opts;
  opts.tol = 1e-4;
  for (auto _ : state) {
    auto sol = ouc::solve_mild_hjb(model, cost, grid, opts);
    benchmark::DoNotOptimize(sol.info.iterations);
  }
}
BENCHMARK(BM_HjbSweep)->Unit(benchmark::kMillisecond)->Arg(33)->Arg(65);

}  // namespace

BENCHMARK_MAIN();
