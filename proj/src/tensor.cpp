#include "hybseq/tensor.hpp"

#include <cmath>
#include <sstream>

namespace hybseq {

size_t shape_numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) {
      throw Error(ErrorCode::ShapeMismatch, "non-positive dimension in " + shape_str(shape));
    }
    n *= static_cast<size_t>(d);
  }
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream out;
  out << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

void check_finite(const Tensor& t, const char* where) {
  for (double v : t.val) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteValue, std::string(where) + " produced NaN/Inf");
    }
  }
}

}  // namespace hybseq
