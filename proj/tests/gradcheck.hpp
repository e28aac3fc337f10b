#pragma once

// Central finite differences over every network parameter, independent of the
// analytic backward pass.

#include <algorithm>
#include <cmath>

#include "homoflow/predictor.hpp"
#include "homoflow/random.hpp"

namespace gradcheck {

inline homoflow::PredictorModel random_model(std::uint64_t seed, const homoflow::Architecture& arch) {
  auto m = homoflow::PredictorModel::initialize(arch, seed);
  homoflow::Rng rng(seed + 100);
  for (auto& b : m.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.5, 0.5);
  for (Eigen::Index i = 0; i < m.target_mean.size(); ++i) {
    m.target_mean(i) = rng.uniform(-2, 2);
    m.target_scale(i) = rng.uniform(0.5, 3);
  }
  return m;
}

inline homoflow::Batch random_batch(std::uint64_t seed, const homoflow::Architecture& arch, int size) {
  homoflow::Rng rng(seed);
  homoflow::Batch b;
  b.inputs = Eigen::MatrixXd(arch.input_dim(), size);
  for (Eigen::Index i = 0; i < b.inputs.size(); ++i) b.inputs.data()[i] = rng.uniform(-0.5, 0.5);
  for (int k = 0; k < size; ++k) {
    homoflow::MotionSequence t;
    for (int s = 0; s < arch.preview; ++s) {
      homoflow::FourPointDelta d;
      for (auto& v : d.d) v = {rng.normal(0, 3), rng.normal(0, 3)};
      t.push_back(d);
    }
    b.targets.push_back(t);
  }
  return b;
}

inline homoflow::Gradients numeric_gradient(homoflow::PredictorModel m, const homoflow::Batch& batch, double lambda,
                                            double h = 1e-6) {
  auto central = [&](double& p) {
    const double keep = p;
    p = keep + h;
    const double up = homoflow::batch_loss(m, batch, lambda);
    p = keep - h;
    const double down = homoflow::batch_loss(m, batch, lambda);
    p = keep;
    return (up - down) / (2 * h);
  };
  homoflow::Gradients g;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd gw(m.weights[l].rows(), m.weights[l].cols());
    for (Eigen::Index i = 0; i < gw.size(); ++i) gw.data()[i] = central(m.weights[l].data()[i]);
    g.weights.push_back(gw);
    Eigen::VectorXd gb(m.biases[l].size());
    for (Eigen::Index i = 0; i < gb.size(); ++i) gb(i) = central(m.biases[l](i));
    g.biases.push_back(gb);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||) over all parameters.
inline double relative_error(const homoflow::Gradients& a, const homoflow::Gradients& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    diff += (a.weights[l] - b.weights[l]).squaredNorm() + (a.biases[l] - b.biases[l]).squaredNorm();
    na += a.weights[l].squaredNorm() + a.biases[l].squaredNorm();
    nb += b.weights[l].squaredNorm() + b.biases[l].squaredNorm();
  }
  return std::sqrt(diff) / std::max(std::sqrt(std::max(na, nb)), 1e-12);
}

// Draw k of the gradient check: alternating depth and preview length.
inline homoflow::Architecture draw_architecture(std::uint64_t k) {
  homoflow::Architecture arch{2, 1 + static_cast<int>(k % 2), 3, {5}};
  if (k % 3 == 0) arch.hidden = {6, 4};
  return arch;
}

}  // namespace gradcheck
