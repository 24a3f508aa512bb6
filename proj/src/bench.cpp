#include "hybseq/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hybseq {

BenchReport run_bench(const std::string& subject, int batch, size_t dataset_size,
                      const std::function<void()>& pass, int trials) {
  if (trials < 1) {
    throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  }
  BenchReport report;
  report.subject = subject;
  report.batch = batch;
  report.dataset_size = dataset_size;

  pass();  // warm-up, untimed

  using clock = std::chrono::steady_clock;
  report.trials.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    const auto start = clock::now();
    pass();
    const auto stop = clock::now();
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start);
    report.trials.push_back(static_cast<double>(ns.count()) * 1e-9);
  }
  double sum = 0;
  for (double t : report.trials) sum += t;
  report.mean = sum / static_cast<double>(trials);
  double sq = 0;
  for (double t : report.trials) sq += (t - report.mean) * (t - report.mean);
  report.stddev = trials > 1 ? std::sqrt(sq / static_cast<double>(trials - 1)) : 0.0;
  report.throughput =
      report.mean > 0 ? static_cast<double>(dataset_size) / report.mean : 0.0;
  return report;
}

std::string BenchReport::table() const {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-14s batch=%-5d n=%zu\n", subject.c_str(), batch,
                dataset_size);
  out << buf;
  out << "trials (s):";
  for (double t : trials) {
    std::snprintf(buf, sizeof buf, " %.3f", t);
    out << buf;
  }
  out << '\n';
  std::snprintf(buf, sizeof buf, "time %.3f +/- %.3f s   throughput %.0f pairs/s\n",
                mean, stddev, throughput);
  out << buf;
  return out.str();
}

std::string BenchReport::records() const {
  std::ostringstream out;
  out << "subject=" << subject << '\n';
  out << "batch=" << batch << '\n';
  out << "dataset_size=" << dataset_size << '\n';
  char buf[64];
  for (size_t i = 0; i < trials.size(); ++i) {
    std::snprintf(buf, sizeof buf, "trial%zu=%.9f", i, trials[i]);
    out << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "mean=%.9f", mean);
  out << buf << '\n';
  std::snprintf(buf, sizeof buf, "stddev=%.9f", stddev);
  out << buf << '\n';
  std::snprintf(buf, sizeof buf, "throughput=%.3f", throughput);
  out << buf << '\n';
  return out.str();
}

}  // namespace hybseq
