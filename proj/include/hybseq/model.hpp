#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hybseq/layers.hpp"

namespace hybseq {

/// An ordered layer pipeline. Construction validates the whole shape chain
/// for the declared input, so a mis-specified architecture fails to build.
class ModelGraph {
 public:
  ModelGraph() = default;
  ModelGraph(std::string name, std::vector<int> input_shape)
      : name_(std::move(name)), input_shape_(std::move(input_shape)) {}

  ModelGraph(ModelGraph&&) = default;
  ModelGraph& operator=(ModelGraph&&) = default;

  void add(std::unique_ptr<Layer> layer);

  const std::string& name() const { return name_; }
  const std::vector<int>& input_shape() const { return input_shape_; }  // no batch axis
  const std::vector<int>& output_shape() const { return output_shape_; }
  size_t layer_count() const { return layers_.size(); }
  Layer& layer(size_t i) { return *layers_[i]; }

  Tensor forward(const Tensor& x, Mode mode, Rng* rng = nullptr);
  /// Backpropagates from d loss / d output; parameter grads accumulate.
  void backward(const Tensor& dloss);

  std::vector<Tensor*> params();
  std::vector<Tensor*> state();
  size_t parameter_count() const;

  void zero_grads();
  void init_weights(Rng& rng);  // Kaiming-uniform fan-in for conv/dense

  /// Snapshot/restore of all params and running state (early stopping).
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& snap);

  /// Set dropout mask freezing on every dropout layer (gradient checks).
  void freeze_dropout(bool frozen);

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static ModelGraph load(std::istream& in);
  static ModelGraph load_file(const std::string& path);

 private:
  std::string name_;
  std::vector<int> input_shape_;
  std::vector<int> output_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Table-3 CNN: 4x9 2D convolution into four 1D convolutions, flatten width
/// 384, three dense layers; every convolution is followed by ReLU then
/// batch normalization. Input [2, 4, 26].
ModelGraph build_cnn();

/// Table-4 reduced variant: flatten width 512, two dense layers.
ModelGraph build_cnn_lite();

/// Feature classifier: hidden widths 117/18/7/19, dropout 0.3296 after each
/// hidden layer, sigmoid output.
ModelGraph build_mlp(int input_dim = 9);

ModelGraph build_model(const std::string& name);

}  // namespace hybseq
