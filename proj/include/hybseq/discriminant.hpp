#pragma once

#include <iosfwd>
#include <vector>

#include "hybseq/dataset.hpp"
#include "hybseq/metrics.hpp"

namespace hybseq {

using FeatureMatrix = std::vector<std::vector<double>>;

/// Pooled-covariance linear discriminant. Scores are the High-minus-Low
/// discriminant difference; predict by sign.
struct LdaModel {
  std::vector<double> mean_low, mean_high;
  std::vector<double> pooled_cov;  // row-major d x d
  double prior_low = 0.5, prior_high = 0.5;
  double shrinkage = 0.0;

  // Precomputed linear form: score(x) = dot(weights, x) + bias.
  std::vector<double> weights;
  double bias = 0.0;

  size_t dim() const { return mean_low.size(); }
};

LdaModel lda_fit(const FeatureMatrix& x, const std::vector<Label>& y,
                 double shrinkage = 0.0);
double lda_score(const LdaModel& m, const std::vector<double>& x);
Label lda_predict(const LdaModel& m, const std::vector<double>& x);

/// Per-class Gaussian discriminant with a ridge added to the covariance
/// diagonals. Scores are log-posterior differences (High minus Low).
struct QdaModel {
  std::vector<double> mean_low, mean_high;
  std::vector<double> cov_low, cov_high;   // row-major d x d, ridged
  std::vector<double> icov_low, icov_high; // inverses
  double log_det_low = 0, log_det_high = 0;
  double prior_low = 0.5, prior_high = 0.5;
  double ridge = 1e-6;

  size_t dim() const { return mean_low.size(); }
};

QdaModel qda_fit(const FeatureMatrix& x, const std::vector<Label>& y,
                 double ridge = 1e-6);
double qda_score(const QdaModel& m, const std::vector<double>& x);
Label qda_predict(const QdaModel& m, const std::vector<double>& x);

template <class Model, class ScoreFn>
std::vector<double> score_all(const Model& m, const FeatureMatrix& x, ScoreFn fn) {
  std::vector<double> scores;
  scores.reserve(x.size());
  for (const auto& row : x) scores.push_back(fn(m, row));
  return scores;
}

void save_lda(const LdaModel& m, std::ostream& out);
LdaModel load_lda(std::istream& in);
void save_qda(const QdaModel& m, std::ostream& out);
QdaModel load_qda(std::istream& in);

}  // namespace hybseq
