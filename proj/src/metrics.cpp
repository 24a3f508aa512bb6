#include "hybseq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hybseq/rng.hpp"

namespace hybseq {

Confusion confusion_counts(const std::vector<Label>& predicted,
                           const std::vector<Label>& truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction/label count mismatch");
  }
  Confusion c;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::High) {
      (predicted[i] == Label::High ? c.tp : c.fn)++;
    } else {
      (predicted[i] == Label::High ? c.fp : c.tn)++;
    }
  }
  return c;
}

double mcc(long tp, long fp, long tn, long fn) {
  if (tp < 0 || fp < 0 || tn < 0 || fn < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative confusion counts");
  }
  const double denom2 = static_cast<double>(tp + fp) * static_cast<double>(tp + fn) *
                        static_cast<double>(tn + fp) * static_cast<double>(tn + fn);
  if (denom2 == 0.0) return 0.0;
  const double num =
      static_cast<double>(tp) * static_cast<double>(tn) -
      static_cast<double>(fp) * static_cast<double>(fn);
  return num / std::sqrt(denom2);
}

double auroc(const std::vector<double>& scores, const std::vector<Label>& truth) {
  if (scores.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "score/label count mismatch");
  }
  size_t n_pos = 0;
  for (Label l : truth) n_pos += (l == Label::High);
  const size_t n_neg = truth.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::OneClassOnly, "AUROC needs both classes present");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Midranks over tie groups.
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (size_t k = i; k <= j; ++k) {
      if (truth[order[k]] == Label::High) rank_sum_pos += midrank;
    }
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

ClassMetrics prf1(double tp, double fp, double fn) {
  ClassMetrics m;
  m.precision = safe_div(tp, tp + fp);
  m.recall = safe_div(tp, tp + fn);
  m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

}  // namespace

ClassMetrics prf1_high(const Confusion& c) {
  return prf1(static_cast<double>(c.tp), static_cast<double>(c.fp),
              static_cast<double>(c.fn));
}

ClassMetrics prf1_low(const Confusion& c) {
  // Low as the positive class: swap roles.
  return prf1(static_cast<double>(c.tn), static_cast<double>(c.fn),
              static_cast<double>(c.fp));
}

MetricsReport compute_report(const std::vector<double>& scores,
                             const std::vector<Label>& predicted,
                             const std::vector<Label>& truth) {
  MetricsReport r;
  r.confusion = confusion_counts(predicted, truth);
  r.low = prf1_low(r.confusion);
  r.high = prf1_high(r.confusion);
  r.mcc = mcc(r.confusion);
  r.auroc = hybseq::auroc(scores, truth);
  return r;
}

MetricsReport compute_regression_report(const std::vector<double>& predictions,
                                        const std::vector<double>& target_yields,
                                        const std::vector<Label>& truth,
                                        double threshold) {
  if (predictions.size() != target_yields.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction/target count mismatch");
  }
  std::vector<Label> predicted;
  predicted.reserve(predictions.size());
  double mse = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    predicted.push_back(predictions[i] >= threshold ? Label::High : Label::Low);
    const double d = predictions[i] - target_yields[i];
    mse += d * d;
  }
  mse /= static_cast<double>(predictions.size());
  MetricsReport r = compute_report(predictions, predicted, truth);
  r.mse = mse;
  r.mse_nm2 = mse * 1e6;
  return r;
}

std::string MetricsReport::table() const {
  std::ostringstream out;
  out << "confusion  TP=" << confusion.tp << " FP=" << confusion.fp
      << " TN=" << confusion.tn << " FN=" << confusion.fn << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s precision=%.3f recall=%.3f f1=%.3f\n", "Low",
                low.precision, low.recall, low.f1);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-6s precision=%.3f recall=%.3f f1=%.3f\n", "High",
                high.precision, high.recall, high.f1);
  out << buf;
  std::snprintf(buf, sizeof buf, "MCC=%.3f AUROC=%.3f", mcc, auroc);
  out << buf;
  if (mse) {
    std::snprintf(buf, sizeof buf, " MSE=%.6f MSE_nM2=%.3f", *mse, *mse_nm2);
    out << buf;
  }
  out << '\n';
  return out.str();
}

std::string MetricsReport::records() const {
  std::ostringstream out;
  char buf[64];
  auto emit = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    out << name << '=' << buf << '\n';
  };
  out << "tp=" << confusion.tp << "\nfp=" << confusion.fp << "\ntn=" << confusion.tn
      << "\nfn=" << confusion.fn << '\n';
  emit("precision_low", low.precision);
  emit("recall_low", low.recall);
  emit("f1_low", low.f1);
  emit("precision_high", high.precision);
  emit("recall_high", high.recall);
  emit("f1_high", high.f1);
  emit("mcc", mcc);
  emit("auroc", auroc);
  if (mse) {
    emit("mse", *mse);
    emit("mse_nm2", *mse_nm2);
  }
  return out.str();
}

double permutation_test(const std::vector<int>& correct_a,
                        const std::vector<int>& correct_b, int iters, uint64_t seed) {
  if (correct_a.size() != correct_b.size()) {
    throw Error(ErrorCode::LengthMismatch, "permutation test needs equal lengths");
  }
  if (correct_a.empty() || iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "permutation test needs data and iters >= 1");
  }
  const size_t n = correct_a.size();
  std::vector<int> pooled;
  pooled.reserve(2 * n);
  pooled.insert(pooled.end(), correct_a.begin(), correct_a.end());
  pooled.insert(pooled.end(), correct_b.begin(), correct_b.end());
  const double inv_n = 1.0 / static_cast<double>(n);
  const double observed =
      std::abs(std::accumulate(correct_a.begin(), correct_a.end(), 0.0) -
               std::accumulate(correct_b.begin(), correct_b.end(), 0.0)) *
      inv_n;
  Rng rng(seed);
  long hits = 0;
  for (int it = 0; it < iters; ++it) {
    rng.shuffle(pooled);
    long sum_a = std::accumulate(pooled.begin(), pooled.begin() + n, 0L);
    long sum_b = std::accumulate(pooled.begin() + n, pooled.end(), 0L);
    const double d = std::abs(static_cast<double>(sum_a - sum_b)) * inv_n;
    if (d >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(iters + 1);
}

}  // namespace hybseq
