#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hybseq/rng.hpp"
#include "hybseq/tensor.hpp"

namespace hybseq {

enum class Mode { Train, Eval };

/// One pipeline stage with manually derived gradients. forward() caches what
/// backward() needs; backward() returns the gradient w.r.t. the input and
/// accumulates parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string describe() const = 0;
  virtual std::vector<int> out_shape(const std::vector<int>& in) const = 0;
  virtual Tensor forward(const Tensor& x, Mode mode, Rng* rng) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;

  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::vector<Tensor*> state() { return {}; }
};

/// Valid (unpadded) 2D convolution over [B, C, H, W].
class Conv2D : public Layer {
 public:
  Conv2D(int in_ch, int out_ch, int kh, int kw);
  std::string describe() const override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }

  Tensor weight_;  // [out, in, kh, kw]
  Tensor bias_;    // [out]

 private:
  int in_ch_, out_ch_, kh_, kw_;
  std::vector<int> cached_in_shape_;
  std::vector<double> scratch_;  // batch patch matrix col[N][patch]
};

/// Valid 1D convolution over [B, C, W]; a rank-4 input with H == 1 is
/// accepted and treated as [B, C, W].
class Conv1D : public Layer {
 public:
  Conv1D(int in_ch, int out_ch, int k);
  std::string describe() const override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }

  Tensor weight_;  // [out, in, k]
  Tensor bias_;    // [out]

 private:
  int in_ch_, out_ch_, k_;
  std::vector<int> cached_in_shape_;
  std::vector<int> orig_shape_;
  std::vector<double> scratch_;  // batch patch matrix col[N][patch]
};

class Dense : public Layer {
 public:
  Dense(int in_dim, int out_dim);
  std::string describe() const override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }

  Tensor weight_;  // [out, in]
  Tensor bias_;    // [out]

 private:
  int in_dim_, out_dim_;
  Tensor cached_x_;
};

class ReLU : public Layer {
 public:
  std::string describe() const override { return "relu"; }
  std::vector<int> out_shape(const std::vector<int>& in) const override { return in; }
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<uint8_t> active_;
};

class Sigmoid : public Layer {
 public:
  std::string describe() const override { return "sigmoid"; }
  std::vector<int> out_shape(const std::vector<int>& in) const override { return in; }
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<double> cached_y_;
};

/// Per-channel normalization over batch and spatial axes for [B, C, ...].
/// Train mode uses biased batch statistics and updates running stats with the
/// unbiased variance; eval mode uses the running statistics.
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5);
  std::string describe() const override;
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<Tensor*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> state() override { return {&running_mean_, &running_var_}; }

  Tensor gamma_, beta_;
  Tensor running_mean_, running_var_;

 private:
  int channels_;
  double momentum_, eps_;
  std::vector<double> xhat_, invstd_;
  std::vector<int> cached_shape_;
  size_t spatial_ = 1, batch_ = 1;
};

/// Inverted dropout: scaling happens at train time, eval is the identity.
class Dropout : public Layer {
 public:
  explicit Dropout(double p);
  std::string describe() const override;
  std::vector<int> out_shape(const std::vector<int>& in) const override { return in; }
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;

  /// Reuse the last sampled mask on subsequent train-mode forwards; used by
  /// the finite-difference gradient checks.
  void freeze_mask(bool frozen) { frozen_ = frozen; }
  double p() const { return p_; }

 private:
  double p_;
  bool frozen_ = false;
  bool last_was_identity_ = true;
  std::vector<uint8_t> mask_;
};

class Flatten : public Layer {
 public:
  std::string describe() const override { return "flatten"; }
  std::vector<int> out_shape(const std::vector<int>& in) const override;
  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<int> orig_shape_;
};

struct LossValue {
  double value = 0;
  Tensor grad;  // d loss / d prediction
};

/// Mean squared error over a [B] or [B,1] prediction tensor.
LossValue mse_loss(const Tensor& pred, const std::vector<double>& target);

/// Binary cross-entropy on probabilities in (0, 1).
LossValue bce_loss(const Tensor& pred, const std::vector<double>& target);

}  // namespace hybseq
