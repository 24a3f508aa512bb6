#pragma once

#include <cstdint>
#include <vector>

#include "hybseq/dataset.hpp"
#include "hybseq/model.hpp"

namespace hybseq {

/// Flat sample storage: n items of identical shape plus scalar targets.
struct SampleSet {
  std::vector<int> item_shape;
  std::vector<double> x;  // n * prod(item_shape), row-major
  std::vector<double> y;  // n

  size_t size() const { return y.size(); }
  size_t item_numel() const { return shape_numel(item_shape); }

  /// One-hot pair images with the reference-temperature yield as target.
  static SampleSet from_pairs(const Dataset& ds, int n_max = kLibMaxLen);
  /// Feature rows (standardize first) with arbitrary targets.
  static SampleSet from_features(const std::vector<std::vector<double>>& rows,
                                 const std::vector<double>& targets);

  Tensor gather(const std::vector<size_t>& indices, size_t begin, size_t end) const;
};

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int batch_size = 256;
  enum class LossKind { MSE, BCE } loss = LossKind::MSE;
  int patience = 3;     // epochs without validation improvement
  long max_epochs = 0;  // 0 = unbounded
  uint64_t seed = 0;
  bool verbose = false;
};

/// Adam with bias correction over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);
  void step();  // consumes .grad, updates .val

 private:
  std::vector<Tensor*> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

struct EpochStats {
  double train_loss = 0;
  double val_loss = 0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  long best_epoch = -1;  // 0-based index into history
  double best_val = 0;
};

/// Minibatch training with shuffling, NaN guards and early stopping on the
/// validation loss; restores the best-validation weights (including batch
/// norm running statistics). Deterministic given cfg.seed.
TrainResult train_model(ModelGraph& model, const SampleSet& train,
                        const SampleSet& val, const TrainConfig& cfg);

/// Eval-mode predictions in input order, clamped to [0, 1].
std::vector<double> predict(ModelGraph& model, const SampleSet& data, int batch_size);

/// Eval-mode mean loss over a sample set.
double evaluate_loss(ModelGraph& model, const SampleSet& data, int batch_size,
                     TrainConfig::LossKind loss);

}  // namespace hybseq
