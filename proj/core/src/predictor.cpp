#include "homoflow/predictor.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "homoflow/error.hpp"
#include "homoflow/parallel.hpp"
#include "homoflow/random.hpp"

namespace homoflow {

using nlohmann::json;

MotionSequence taylor_o1(std::span<const FourPointDelta> recall, int steps) {
  if (recall.empty()) throw MissingHistory("O(1) extrapolation needs one past motion");
  return MotionSequence(static_cast<std::size_t>(steps), recall.back());
}

MotionSequence taylor_o2(std::span<const FourPointDelta> recall, int steps) {
  if (recall.size() < 2) throw MissingHistory("O(2) extrapolation needs two past motions");
  const FourPointDelta& last = recall[recall.size() - 1];
  const FourPointDelta slope = last - recall[recall.size() - 2];
  MotionSequence out;
  for (int k = 1; k <= steps; ++k) out.push_back(last + slope * static_cast<double>(k));
  return out;
}

PredictorModel PredictorModel::initialize(const Architecture& arch, std::uint64_t seed) {
  PredictorModel m;
  m.arch = arch;
  m.seed = seed;
  Rng rng(seed);
  int fan_in = arch.input_dim();
  std::vector<int> dims = arch.hidden;
  dims.push_back(arch.output_dim());
  for (int fan_out : dims) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    fan_in = fan_out;
  }
  m.target_mean = Eigen::VectorXd::Zero(arch.output_dim());
  m.target_scale = Eigen::VectorXd::Ones(arch.output_dim());
  return m;
}

void PredictorModel::validate() const {
  if (weights.size() != arch.hidden.size() + 1 || biases.size() != weights.size())
    throw DimensionMismatch("layer count does not match architecture");
  Eigen::Index fan_in = arch.input_dim();
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Eigen::Index fan_out = l < arch.hidden.size() ? arch.hidden[l] : arch.output_dim();
    if (weights[l].rows() != fan_out || weights[l].cols() != fan_in || biases[l].size() != fan_out)
      throw DimensionMismatch("layer " + std::to_string(l) + " has wrong shape");
    if (!weights[l].allFinite() || !biases[l].allFinite()) throw InvalidInput("non-finite weights");
    fan_in = fan_out;
  }
  if (target_mean.size() != arch.output_dim() || target_scale.size() != arch.output_dim())
    throw DimensionMismatch("normalization size does not match output");
}

std::size_t PredictorModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

bool operator==(const PredictorModel& a, const PredictorModel& b) {
  if (!(a.arch == b.arch) || a.seed != b.seed || a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l)
    if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
  return a.target_mean == b.target_mean && a.target_scale == b.target_scale;
}

namespace {

std::vector<double> to_vector(const Eigen::MatrixXd& m) {
  // Row-major flattening.
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
  return v;
}

Eigen::MatrixXd from_vector(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) throw DimensionMismatch("weight array has wrong length");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(r * cols + c)];
  return m;
}

Eigen::VectorXd vec_from(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> vec_to(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string model_to_json(const PredictorModel& model) {
  json layers = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l)
    layers.push_back({{"rows", model.weights[l].rows()},
                      {"cols", model.weights[l].cols()},
                      {"weights", to_vector(model.weights[l])},
                      {"bias", vec_to(model.biases[l])}});
  const json j = {
      {"arch",
       {{"recall", model.arch.recall},
        {"preview", model.arch.preview},
        {"frame_size", model.arch.frame_size},
        {"input_dim", model.arch.input_dim()},
        {"hidden_dims", model.arch.hidden},
        {"output_dim", model.arch.output_dim()},
        {"activation", "tanh"}}},
      {"normalization", {{"mean", vec_to(model.target_mean)}, {"scale", vec_to(model.target_scale)}}},
      {"seed", model.seed},
      {"created", model.created},
      {"layers", layers}};
  return j.dump();
}

PredictorModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    PredictorModel m;
    const auto& a = j.at("arch");
    m.arch.recall = a.at("recall").get<int>();
    m.arch.preview = a.at("preview").get<int>();
    m.arch.frame_size = a.at("frame_size").get<int>();
    m.arch.hidden = a.at("hidden_dims").get<std::vector<int>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.created = j.value("created", "");
    m.target_mean = vec_from(j.at("normalization").at("mean").get<std::vector<double>>());
    m.target_scale = vec_from(j.at("normalization").at("scale").get<std::vector<double>>());
    for (const auto& layer : j.at("layers")) {
      const auto rows = layer.at("rows").get<Eigen::Index>();
      const auto cols = layer.at("cols").get<Eigen::Index>();
      m.weights.push_back(from_vector(layer.at("weights").get<std::vector<double>>(), rows, cols));
      m.biases.push_back(vec_from(layer.at("bias").get<std::vector<double>>()));
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const PredictorModel& model) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

PredictorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

namespace {

// Activations of every layer; acts[0] is the input, acts.back() the
// normalized output.
std::vector<Eigen::MatrixXd> forward_all(const PredictorModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.arch.input_dim()) throw DimensionMismatch("input has wrong dimension");
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Eigen::MatrixXd z = model.weights[l] * acts.back();
    z.colwise() += model.biases[l];
    if (l + 1 < model.weights.size()) z = z.array().tanh().matrix();
    acts.push_back(std::move(z));
  }
  return acts;
}

Eigen::MatrixXd denormalize(const PredictorModel& model, const Eigen::MatrixXd& out) {
  Eigen::MatrixXd pred = out.array().colwise() * model.target_scale.array();
  pred.colwise() += model.target_mean;
  return pred;
}

}  // namespace

Eigen::MatrixXd forward_batch(const PredictorModel& model, const Eigen::MatrixXd& inputs) {
  return denormalize(model, forward_all(model, inputs).back());
}

MotionSequence unpack_motions(const Eigen::VectorXd& flat) {
  if (flat.size() % 8 != 0) throw DimensionMismatch("motion vector length must be a multiple of 8");
  MotionSequence out;
  for (Eigen::Index k = 0; k < flat.size() / 8; ++k) {
    FourPointDelta d;
    for (int c = 0; c < 4; ++c) d.d[c] = Vec2(flat(8 * k + 2 * c), flat(8 * k + 2 * c + 1));
    out.push_back(d);
  }
  return out;
}

Eigen::VectorXd pack_motions(const MotionSequence& motions) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(8 * motions.size()));
  for (std::size_t k = 0; k < motions.size(); ++k)
    for (int c = 0; c < 4; ++c) {
      flat(static_cast<Eigen::Index>(8 * k + 2 * c)) = motions[k].d[c].x();
      flat(static_cast<Eigen::Index>(8 * k + 2 * c + 1)) = motions[k].d[c].y();
    }
  return flat;
}

MotionSequence forward(const PredictorModel& model, const Eigen::VectorXd& input) {
  return unpack_motions(forward_batch(model, input).col(0));
}

MotionSequence forward(const PredictorModel& model, const PredictorInput& input) {
  if (static_cast<int>(input.recall_frames.size()) != model.arch.recall)
    throw DimensionMismatch("recall frame count does not match the model");
  for (const auto& f : input.recall_frames)
    if (f.width != model.arch.frame_size || f.height != model.arch.frame_size)
      throw DimensionMismatch("recall frames must be downsampled to the model frame size");
  return forward(model, flatten_frames(input.recall_frames));
}

double loss(const MotionSequence& pred, const MotionSequence& target, double lambda) {
  if (pred.size() != target.size() || pred.empty()) throw DimensionMismatch("prediction/target shape mismatch");
  double err = 0.0, reg = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k)
    for (int c = 0; c < 4; ++c) {
      err += (pred[k].d[c] - target[k].d[c]).norm();
      reg += pred[k].d[c].norm();
    }
  const double n = 4.0 * static_cast<double>(pred.size());
  return err / n + lambda * reg / n;
}

namespace {

void check_batch(const PredictorModel& model, const Batch& batch) {
  if (batch.inputs.cols() == 0) throw EmptyDataset("empty batch");
  if (static_cast<std::size_t>(batch.inputs.cols()) != batch.targets.size())
    throw DimensionMismatch("batch inputs and targets differ in count");
  for (const auto& t : batch.targets)
    if (static_cast<int>(t.size()) != model.arch.preview) throw DimensionMismatch("target has wrong preview length");
}

}  // namespace

double batch_loss(const PredictorModel& model, const Batch& batch, double lambda) {
  check_batch(model, batch);
  const Eigen::MatrixXd pred = forward_batch(model, batch.inputs);
  double total = 0.0;
  for (Eigen::Index b = 0; b < pred.cols(); ++b)
    total += loss(unpack_motions(pred.col(b)), batch.targets[static_cast<std::size_t>(b)], lambda);
  return total / static_cast<double>(pred.cols());
}

Gradients gradient(const PredictorModel& model, const Batch& batch, double lambda) {
  check_batch(model, batch);
  const auto acts = forward_all(model, batch.inputs);
  const Eigen::MatrixXd pred = denormalize(model, acts.back());
  const Eigen::Index nb = pred.cols();
  const double corner_weight = 1.0 / (4.0 * model.arch.preview * static_cast<double>(nb));

  // dL/dpred, then through the de-normalization.
  Eigen::MatrixXd delta(pred.rows(), nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const Eigen::VectorXd target = pack_motions(batch.targets[static_cast<std::size_t>(b)]);
    for (Eigen::Index j = 0; j < pred.rows(); j += 2) {
      const Eigen::Vector2d p = pred.block<2, 1>(j, b);
      const Eigen::Vector2d e = p - target.segment<2>(j);
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      const double en = e.norm();
      if (en > 0.0) g += e / en;
      const double pn = p.norm();
      if (pn > 0.0) g += lambda * p / pn;
      delta.block<2, 1>(j, b) = corner_weight * g;
    }
  }
  delta = delta.array().colwise() * model.target_scale.array();

  Gradients grads;
  grads.weights.resize(model.weights.size());
  grads.biases.resize(model.weights.size());
  for (std::size_t l = model.weights.size(); l-- > 0;) {
    grads.weights[l] = delta * acts[l].transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = model.weights[l].transpose() * delta;
      delta = back.array() * (1.0 - acts[l].array().square());
    }
  }
  return grads;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterOutOfRange("epochs must be >= 1");
  if (batch_size < 1) throw ParameterOutOfRange("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ParameterOutOfRange("learning_rate must be > 0");
  if (!(lambda >= 0.0)) throw ParameterOutOfRange("lambda must be >= 0");
  if (optimizer != "adam" && optimizer != "sgd") throw ParameterOutOfRange("optimizer must be adam or sgd");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterOutOfRange("momentum must be in [0, 1)");
  for (int h : hidden)
    if (h < 1) throw ParameterOutOfRange("hidden layer sizes must be >= 1");
  for (const auto& [epoch, factor] : lr_drops)
    if (epoch < 0 || !(factor > 0.0)) throw ParameterOutOfRange("invalid lr drop");
}

double TrainConfig::lr_at(int epoch) const {
  double lr = learning_rate;
  for (const auto& [at, factor] : lr_drops)
    if (epoch >= at) lr *= factor;
  return lr;
}

std::string train_config_to_json(const TrainConfig& cfg) {
  json drops = json::array();
  for (const auto& [e, f] : cfg.lr_drops) drops.push_back({e, f});
  const json j = {{"epochs", cfg.epochs},
                  {"batch_size", cfg.batch_size},
                  {"learning_rate", cfg.learning_rate},
                  {"lr_drops", drops},
                  {"lambda", cfg.lambda},
                  {"seed", cfg.seed},
                  {"optimizer", cfg.optimizer},
                  {"momentum", cfg.momentum},
                  {"hidden_dims", cfg.hidden},
                  {"augmentation",
                   {{"geometric", cfg.augmentation.geometric},
                    {"photometric", cfg.augmentation.photometric},
                    {"seed", cfg.augmentation.seed}}}};
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.optimizer = j.value("optimizer", cfg.optimizer);
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.hidden = j.value("hidden_dims", cfg.hidden);
    if (j.contains("lr_drops"))
      for (const auto& d : j.at("lr_drops")) cfg.lr_drops.emplace_back(d.at(0).get<int>(), d.at(1).get<double>());
    if (j.contains("augmentation")) {
      const auto& a = j.at("augmentation");
      cfg.augmentation.geometric = a.value("geometric", false);
      cfg.augmentation.photometric = a.value("photometric", false);
      cfg.augmentation.seed = a.value("seed", std::uint64_t{0});
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed train config: ") + e.what());
  }
}

std::string loss_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream os;
  os << "epoch,split,loss,mpd,lr\n";
  os.precision(10);
  for (const auto& e : log) os << e.epoch << ',' << e.split << ',' << e.loss << ',' << e.mpd << ',' << e.lr << '\n';
  return os.str();
}

namespace {

class Optimizer {
 public:
  Optimizer(const PredictorModel& model, const TrainConfig& cfg)
      : adam_(cfg.optimizer == "adam"), momentum_(cfg.momentum) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      m_w_.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
      m_b_.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
      if (adam_) {
        v_w_.push_back(m_w_.back());
        v_b_.push_back(m_b_.back());
      }
    }
  }

  void step(PredictorModel& model, const Gradients& g, double lr) {
    ++t_;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      if (adam_) {
        const double c1 = 1.0 - std::pow(kBeta1, t_);
        const double c2 = 1.0 - std::pow(kBeta2, t_);
        m_w_[l] = kBeta1 * m_w_[l] + (1.0 - kBeta1) * g.weights[l];
        v_w_[l] = kBeta2 * v_w_[l] + (1.0 - kBeta2) * g.weights[l].cwiseAbs2();
        model.weights[l].array() -= lr * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + kEps);
        m_b_[l] = kBeta1 * m_b_[l] + (1.0 - kBeta1) * g.biases[l];
        v_b_[l] = kBeta2 * v_b_[l] + (1.0 - kBeta2) * g.biases[l].cwiseAbs2();
        model.biases[l].array() -= lr * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + kEps);
      } else {
        m_w_[l] = momentum_ * m_w_[l] + g.weights[l];
        m_b_[l] = momentum_ * m_b_[l] + g.biases[l];
        model.weights[l] -= lr * m_w_[l];
        model.biases[l] -= lr * m_b_[l];
      }
    }
  }

 private:
  bool adam_;
  double momentum_;
  int t_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

Batch assemble(const ClipDataset& data, std::span<const std::size_t> clips, const std::vector<Augmentation>& augs,
               int threads) {
  Batch batch;
  const int dim = static_cast<int>(data.spec().n) * data.frame_size() * data.frame_size();
  batch.inputs.resize(dim, static_cast<Eigen::Index>(clips.size()));
  batch.targets.resize(clips.size());
  parallel_for(clips.size(), threads, [&](std::size_t i) {
    ClipSample s = make_sample(data, clips[i], augs[i]);
    batch.inputs.col(static_cast<Eigen::Index>(i)) = s.input;
    batch.targets[i] = std::move(s.targets);
  });
  return batch;
}

double batch_mpd(const Eigen::MatrixXd& pred, const std::vector<MotionSequence>& targets) {
  double total = 0.0;
  for (Eigen::Index b = 0; b < pred.cols(); ++b)
    total += loss(unpack_motions(pred.col(b)), targets[static_cast<std::size_t>(b)], 0.0);
  return total;
}

// Loss and MPD summed over a dataset without augmentation.
std::pair<double, double> evaluate_split(const PredictorModel& model, const ClipDataset& data, double lambda,
                                         int batch_size, int threads) {
  double loss_sum = 0.0, mpd_sum = 0.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(batch_size)) {
    const std::size_t e = std::min(order.size(), s + static_cast<std::size_t>(batch_size));
    const std::span<const std::size_t> idx(order.data() + s, e - s);
    const Batch batch = assemble(data, idx, std::vector<Augmentation>(idx.size()), threads);
    const Eigen::MatrixXd pred = forward_batch(model, batch.inputs);
    for (Eigen::Index b = 0; b < pred.cols(); ++b)
      loss_sum += loss(unpack_motions(pred.col(b)), batch.targets[static_cast<std::size_t>(b)], lambda);
    mpd_sum += batch_mpd(pred, batch.targets);
  }
  const double n = static_cast<double>(data.size());
  return {loss_sum / n, mpd_sum / n};
}

}  // namespace

TrainResult train(const ClipDataset& training, const ClipDataset& validation, const TrainConfig& cfg) {
  cfg.validate();
  if (training.empty()) throw EmptyDataset("no training clips");
  const auto& spec = training.spec();

  Architecture arch;
  arch.recall = spec.n;
  arch.preview = spec.m;
  arch.frame_size = training.frame_size();
  arch.hidden = cfg.hidden;
  TrainResult result{PredictorModel::initialize(arch, cfg.seed), {}};
  PredictorModel& model = result.model;

  // Per-output z-score of the un-augmented training targets.
  {
    const Eigen::Index dim = arch.output_dim();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim), sq = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < training.size(); ++i) {
      const Eigen::VectorXd t = pack_motions(training.targets(i));
      sum += t;
      sq += t.cwiseAbs2();
    }
    const double n = static_cast<double>(training.size());
    model.target_mean = sum / n;
    const Eigen::VectorXd var = (sq / n - model.target_mean.cwiseAbs2()).cwiseMax(0.0);
    model.target_scale = var.cwiseSqrt().unaryExpr([](double s) { return s > 1e-9 ? s : 1.0; });
  }

  Optimizer opt(model, cfg);
  std::vector<std::size_t> order(training.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.index(i)]);

    double loss_sum = 0.0, mpd_sum = 0.0;
    for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), s + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> idx(order.data() + s, e - s);
      std::vector<Augmentation> augs(idx.size());
      if (cfg.augmentation.geometric || cfg.augmentation.photometric) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
          const std::uint64_t key = static_cast<std::uint64_t>(epoch) * training.size() + idx[i];
          augs[i] = sample_augmentation(derive_seed(cfg.augmentation.seed, key), cfg.augmentation.geometric,
                                        cfg.augmentation.photometric);
        }
      }
      const Batch batch = assemble(training, idx, augs, cfg.threads);
      const Eigen::MatrixXd pred = forward_batch(model, batch.inputs);
      for (Eigen::Index b = 0; b < pred.cols(); ++b)
        loss_sum += loss(unpack_motions(pred.col(b)), batch.targets[static_cast<std::size_t>(b)], cfg.lambda);
      mpd_sum += batch_mpd(pred, batch.targets);
      opt.step(model, gradient(model, batch, cfg.lambda), lr);
    }
    const double n = static_cast<double>(training.size());
    result.log.push_back({epoch, "train", loss_sum / n, mpd_sum / n, lr});
    if (!validation.empty()) {
      const auto [vl, vm] = evaluate_split(model, validation, cfg.lambda, cfg.batch_size, cfg.threads);
      result.log.push_back({epoch, "val", vl, vm, lr});
    }
  }
  return result;
}

std::vector<MotionSequence> predict_clips(const PredictorModel& model, const ClipDataset& data, int threads) {
  std::vector<MotionSequence> out(data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  constexpr std::size_t kChunk = 128;
  for (std::size_t s = 0; s < order.size(); s += kChunk) {
    const std::size_t e = std::min(order.size(), s + kChunk);
    const std::span<const std::size_t> idx(order.data() + s, e - s);
    const Batch batch = assemble(data, idx, std::vector<Augmentation>(idx.size()), threads);
    const Eigen::MatrixXd pred = forward_batch(model, batch.inputs);
    for (Eigen::Index b = 0; b < pred.cols(); ++b) out[s + static_cast<std::size_t>(b)] = unpack_motions(pred.col(b));
  }
  return out;
}

}  // namespace homoflow
