#include "hybseq/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

namespace hybseq {

SampleSet SampleSet::from_pairs(const Dataset& ds, int n_max) {
  SampleSet set;
  set.item_shape = {2, 4, n_max};
  const size_t item = set.item_numel();
  set.x.assign(ds.records.size() * item, 0.0);
  set.y.reserve(ds.records.size());
  const size_t ref_idx = ds.ref_index();
  std::vector<uint8_t> bytes(item);
  for (size_t i = 0; i < ds.records.size(); ++i) {
    const auto& rec = ds.records[i];
    one_hot_pair_bytes(rec.s1, rec.s2, n_max, bytes.data());
    double* row = set.x.data() + i * item;
    for (size_t k = 0; k < item; ++k) row[k] = bytes[k];
    set.y.push_back(rec.yields[ref_idx]);
  }
  return set;
}

SampleSet SampleSet::from_features(const std::vector<std::vector<double>>& rows,
                                   const std::vector<double>& targets) {
  if (rows.size() != targets.size()) {
    throw Error(ErrorCode::LengthMismatch, "feature/target count mismatch");
  }
  if (rows.empty()) {
    throw Error(ErrorCode::TooFew, "empty sample set");
  }
  SampleSet set;
  set.item_shape = {static_cast<int>(rows[0].size())};
  set.x.reserve(rows.size() * rows[0].size());
  for (const auto& row : rows) {
    if (row.size() != rows[0].size()) {
      throw Error(ErrorCode::LengthMismatch, "ragged feature matrix");
    }
    set.x.insert(set.x.end(), row.begin(), row.end());
  }
  set.y = targets;
  return set;
}

Tensor SampleSet::gather(const std::vector<size_t>& indices, size_t begin,
                         size_t end) const {
  const size_t item = item_numel();
  std::vector<int> shape = item_shape;
  shape.insert(shape.begin(), static_cast<int>(end - begin));
  Tensor batch(shape);
  for (size_t i = begin; i < end; ++i) {
    std::memcpy(batch.val.data() + (i - begin) * item, x.data() + indices[i] * item,
                item * sizeof(double));
  }
  return batch;
}

Adam::Adam(std::vector<Tensor*> params, double lr, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr <= 0) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  }
  for (Tensor* p : params_) {
    m_.emplace_back(p->numel(), 0.0);
    v_.emplace_back(p->numel(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = *params_[pi];
    p.ensure_grad();
    double* m = m_[pi].data();
    double* v = v_[pi].data();
    const double* g = p.grad.data();
    double* w = p.val.data();
    const size_t n = p.numel();
    for (size_t i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

namespace {

LossValue compute_loss(const Tensor& pred, const std::vector<double>& target,
                       TrainConfig::LossKind kind) {
  return kind == TrainConfig::LossKind::MSE ? mse_loss(pred, target)
                                            : bce_loss(pred, target);
}

void check_grads_finite(ModelGraph& model) {
  for (Tensor* p : model.params()) {
    for (double g : p->grad) {
      if (!std::isfinite(g)) {
        throw Error(ErrorCode::NonFiniteGradient, "gradient overflow during training");
      }
    }
  }
}

}  // namespace

TrainResult train_model(ModelGraph& model, const SampleSet& train,
                        const SampleSet& val, const TrainConfig& cfg) {
  if (train.size() == 0 || val.size() == 0) {
    throw Error(ErrorCode::TooFew, "training needs non-empty train and val splits");
  }
  if (cfg.patience < 1 || cfg.batch_size < 1) {
    throw Error(ErrorCode::InvalidArgument, "patience and batch size must be >= 1");
  }
  Rng rng(cfg.seed);
  Adam optimizer(model.params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<std::vector<double>> best_snapshot;
  int stale = 0;
  std::vector<double> target;

  for (long epoch = 0; cfg.max_epochs == 0 || epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const size_t end = std::min(order.size(), begin + cfg.batch_size);
      Tensor batch = train.gather(order, begin, end);
      target.clear();
      for (size_t i = begin; i < end; ++i) target.push_back(train.y[order[i]]);
      Tensor pred = model.forward(batch, Mode::Train, &rng);
      LossValue loss = compute_loss(pred, target, cfg.loss);
      model.zero_grads();
      model.backward(loss.grad);
      check_grads_finite(model);
      optimizer.step();
      loss_sum += loss.value * static_cast<double>(end - begin);
    }
    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.val_loss = evaluate_loss(model, val, cfg.batch_size, cfg.loss);
    result.history.push_back(stats);
    if (cfg.verbose) {
      std::fprintf(stderr, "epoch %ld train %.6f val %.6f\n", epoch, stats.train_loss,
                   stats.val_loss);
    }

    if (result.best_epoch < 0 || stats.val_loss < result.best_val) {
      result.best_epoch = epoch;
      result.best_val = stats.val_loss;
      best_snapshot = model.snapshot();
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  if (!best_snapshot.empty()) {
    model.restore(best_snapshot);
  }
  return result;
}

std::vector<double> predict(ModelGraph& model, const SampleSet& data, int batch_size) {
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> out;
  out.reserve(data.size());
  for (size_t begin = 0; begin < data.size(); begin += batch_size) {
    const size_t end = std::min(data.size(), begin + static_cast<size_t>(batch_size));
    Tensor batch = data.gather(order, begin, end);
    Tensor pred = model.forward(batch, Mode::Eval, nullptr);
    for (double v : pred.val) out.push_back(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

double evaluate_loss(ModelGraph& model, const SampleSet& data, int batch_size,
                     TrainConfig::LossKind loss) {
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double sum = 0;
  std::vector<double> target;
  for (size_t begin = 0; begin < data.size(); begin += batch_size) {
    const size_t end = std::min(data.size(), begin + static_cast<size_t>(batch_size));
    Tensor batch = data.gather(order, begin, end);
    target.clear();
    for (size_t i = begin; i < end; ++i) target.push_back(data.y[i]);
    Tensor pred = model.forward(batch, Mode::Eval, nullptr);
    sum += compute_loss(pred, target, loss).value * static_cast<double>(end - begin);
  }
  return sum / static_cast<double>(data.size());
}

}  // namespace hybseq
