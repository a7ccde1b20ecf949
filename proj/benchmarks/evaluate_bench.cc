// Copyright 2026 The embshape Authors
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
#include <vector>

#include <benchmark/benchmark.h>

#include "embshape/evaluate.h"

namespace embshape {
namespace {

Matrix blobs(Eigen::Index rows, Eigen::Index cols, int k, std::vector<int>* labels) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  labels->assign(rows, 0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    int c = static_cast<int>(i % k);
    (*labels)[i] = c;
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng) + (j % k == c ? 4.0 : 0.0);
  }
  return m;
}

void BM_KMeans(benchmark::State& state) {
  std::vector<int> labels;
  Matrix x = blobs(state.range(0), 64, 8, &labels);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(x, 8, 1));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Hungarian(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 100);
  const Eigen::Index k = state.range(0);
  Matrix w(k, k);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(max_weight_assignment(w));
}
BENCHMARK(BM_Hungarian)->Arg(8)->Arg(64)->Arg(256);

void BM_SoftmaxFit(benchmark::State& state) {
  std::vector<int> labels;
  Matrix x = blobs(2000, 64, 4, &labels);
  Matrix y = one_hot(labels, 4);
  SoftmaxOptions options;
  for (auto _ : state) benchmark::DoNotOptimize(SoftmaxClassifier::fit(x, y, options));
}
BENCHMARK(BM_SoftmaxFit)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace embshape
