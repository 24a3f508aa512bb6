#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybseq/dataset.hpp"

namespace hybseq {

/// High is the positive class.
struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

Confusion confusion_counts(const std::vector<Label>& predicted,
                           const std::vector<Label>& truth);

/// Matthews correlation coefficient; 0 when any marginal is empty.
double mcc(long tp, long fp, long tn, long fn);
inline double mcc(const Confusion& c) { return mcc(c.tp, c.fp, c.tn, c.fn); }

/// Mann-Whitney AUROC with midrank tie handling. Throws OneClassOnly.
double auroc(const std::vector<double>& scores, const std::vector<Label>& truth);

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
};

/// Per-class precision/recall/F1 (0 where a denominator is 0).
ClassMetrics prf1_high(const Confusion& c);
ClassMetrics prf1_low(const Confusion& c);

struct MetricsReport {
  Confusion confusion;
  ClassMetrics low, high;
  double mcc = 0;
  double auroc = 0;
  std::optional<double> mse;      // regressors only, on yields in [0, 1]
  std::optional<double> mse_nm2;  // same, scaled to nM^2 at 1 uM (x 1e6)

  std::string table() const;    // human-readable block
  std::string records() const;  // one `name=value` per line
};

/// Builds the report from classifier scores (used for AUROC), hard
/// predictions and ground-truth labels.
MetricsReport compute_report(const std::vector<double>& scores,
                             const std::vector<Label>& predicted,
                             const std::vector<Label>& truth);

/// Regression flavour: predictions are thresholded for the classification
/// metrics and MSE is reported on the raw values.
MetricsReport compute_regression_report(const std::vector<double>& predictions,
                                        const std::vector<double>& target_yields,
                                        const std::vector<Label>& truth,
                                        double threshold = 0.2);

/// Two-sided Monte Carlo permutation test on the mean difference of two
/// equal-length binary (0/1 correctness) vectors under group exchange.
/// p = (1 + #{|d'| >= |d|}) / (iters + 1); deterministic given seed.
double permutation_test(const std::vector<int>& correct_a,
                        const std::vector<int>& correct_b, int iters = 5000,
                        uint64_t seed = 0);

}  // namespace hybseq
