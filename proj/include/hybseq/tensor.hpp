#pragma once

#include <string>
#include <vector>

#include "hybseq/error.hpp"

namespace hybseq {

size_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

/// Dense n-dimensional value array with a same-shape gradient accumulator.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> val;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    val.assign(shape_numel(shape), 0.0);
  }

  size_t numel() const { return val.size(); }
  int dim(size_t i) const { return shape[i]; }

  void ensure_grad() {
    if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
  }
  void zero_grad() { grad.assign(val.size(), 0.0); }
};

/// Throws NonFiniteValue when a NaN or Inf appears.
void check_finite(const Tensor& t, const char* where);

}  // namespace hybseq
