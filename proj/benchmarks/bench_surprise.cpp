// Copyright 2026 The Surprise Potential Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <benchmark/benchmark.h>

#include "surprise/shift_metrics.hpp"
#include "surprise/surprise.hpp"
#include "surprise/synthetic.hpp"

using namespace surprise;

namespace {

GmmPrediction random_gmm(int k, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  GmmPrediction out{"a", {}};
  for (int i = 0; i < k; ++i) {
    Eigen::MatrixXd b(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) b(r, c) = g(rng);
    Eigen::VectorXd mu(dim);
    for (int r = 0; r < dim; ++r) mu(r) = 3.0 * g(rng);
    out.modes.push_back({1.0 / k, mu, b.transpose() * b / dim + 0.1 * Eigen::MatrixXd::Identity(dim, dim)});
  }
  return out;
}

void BM_GaussianW2(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto a = random_gmm(1, static_cast<int>(state.range(0)), rng);
  const auto b = random_gmm(1, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_w2_cost(a.modes[0], b.modes[0]));
}
BENCHMARK(BM_GaussianW2)->Arg(2)->Arg(16)->Arg(32);

void BM_W2Gmm(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto a = random_gmm(static_cast<int>(state.range(0)), 16, rng);
  const auto b = random_gmm(static_cast<int>(state.range(0)), 16, rng);
  for (auto _ : state) benchmark::DoNotOptimize(w2_gmm(a, b));
}
BENCHMARK(BM_W2Gmm)->Arg(1)->Arg(6)->Arg(15);

void BM_Transport(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd cost(k, k);
  Eigen::VectorXd s(k), d(k);
  for (int i = 0; i < k; ++i) {
    s(i) = u(rng);
    d(i) = u(rng);
    for (int j = 0; j < k; ++j) cost(i, j) = u(rng);
  }
  s /= s.sum();
  d /= d.sum();
  for (auto _ : state) benchmark::DoNotOptimize(solve_transport(cost, s, d).objective);
}
BENCHMARK(BM_Transport)->Arg(3)->Arg(6)->Arg(15);

void BM_Kld(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto a = random_gmm(6, 16, rng);
  const auto b = random_gmm(6, 16, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kld_gmm(a, b, static_cast<int>(state.range(0)), 5).value);
}
BENCHMARK(BM_Kld)->Arg(2000);

void BM_SurpriseScene(benchmark::State& state) {
  const auto corpus = make_synthetic_corpus({4, 4, 7, true});
  const auto lib = extract_primitives(corpus.scenarios, 5.0, 16, 0);
  ReferencePredictor pred;
  const auto seg = default_segment(corpus.scenarios.front());
  const SurpriseConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(surprise::surprise(seg, cfg, &lib, pred).score);
}
BENCHMARK(BM_SurpriseScene);

}  // namespace
BENCHMARK_MAIN();
