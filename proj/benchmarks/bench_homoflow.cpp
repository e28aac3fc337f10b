#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "homoflow/estimation.hpp"
#include "homoflow/homography.hpp"
#include "homoflow/predictor.hpp"
#include "homoflow/synthetic.hpp"

using namespace homoflow;

namespace {

void BM_FourPointRoundTrip(benchmark::State& state) {
  const FrameGeometry geom{320, 240};
  const Homography g = random_homography(7, geom, 40.0);
  for (auto _ : state) {
    const FourPointDelta d = four_point_from_matrix(g, geom);
    benchmark::DoNotOptimize(matrix_from_four_point(d, geom));
  }
}
BENCHMARK(BM_FourPointRoundTrip);

void BM_DltFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Homography g = random_homography(11, {256, 256}, 20.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<Vec2> src, dst;
  for (std::size_t i = 0; i < n; ++i) {
    src.emplace_back(u(rng), u(rng));
    dst.push_back(project_point(g, src.back()));
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_homography_dlt(src, dst));
}
BENCHMARK(BM_DltFit)->Arg(4)->Arg(64)->Arg(512);

void BM_EstimateMotion(benchmark::State& state) {
  const Scene scene = generate_scene(5, 1024);
  const int size = static_cast<int>(state.range(0));
  const FrameGeometry geom{size, size};
  const auto [a, b] = render_pair(scene, random_homography(13, geom, 0.1 * size), geom);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_motion(a, b, EstimatorConfig{}));
}
BENCHMARK(BM_EstimateMotion)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PredictorForward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const PredictorModel model = PredictorModel::initialize({14, 1, 32, {128}}, 1);
  const Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(model.arch.input_dim(), batch);
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(model, inputs));
}
BENCHMARK(BM_PredictorForward)->Arg(1)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
