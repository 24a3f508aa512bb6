#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hybseq/error.hpp"

namespace hybseq {

/// Table-2-style timing record: one untimed warm-up pass, then `trials`
/// timed passes over the same pre-loaded dataset.
struct BenchReport {
  std::string subject;
  int batch = 0;
  size_t dataset_size = 0;
  std::vector<double> trials;  // seconds
  double mean = 0;
  double stddev = 0;           // sample standard deviation
  double throughput = 0;       // pairs per second at the mean

  std::string table() const;
  std::string records() const;  // name=value lines
};

/// Times `pass` with a monotonic clock. The pass must cover prediction only;
/// all loading, encoding and model setup happens before this call.
BenchReport run_bench(const std::string& subject, int batch, size_t dataset_size,
                      const std::function<void()>& pass, int trials = 10);

}  // namespace hybseq
