#include "hybseq/discriminant.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <ostream>

namespace hybseq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ClassStats {
  VectorXd mean;
  MatrixXd scatter;  // sum of outer products of centered rows
  long count = 0;
};

void accumulate(const FeatureMatrix& x, const std::vector<Label>& y, Label which,
                ClassStats& stats) {
  const size_t d = x[0].size();
  stats.mean = VectorXd::Zero(d);
  stats.scatter = MatrixXd::Zero(d, d);
  for (size_t i = 0; i < x.size(); ++i) {
    if (y[i] != which) continue;
    ++stats.count;
    for (size_t c = 0; c < d; ++c) stats.mean(c) += x[i][c];
  }
  if (stats.count == 0) return;
  stats.mean /= static_cast<double>(stats.count);
  VectorXd row(d);
  for (size_t i = 0; i < x.size(); ++i) {
    if (y[i] != which) continue;
    for (size_t c = 0; c < d; ++c) row(c) = x[i][c] - stats.mean(c);
    stats.scatter.noalias() += row * row.transpose();
  }
}

void check_inputs(const FeatureMatrix& x, const std::vector<Label>& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "feature/label count mismatch");
  }
  if (x.empty()) {
    throw Error(ErrorCode::TooFew, "no training rows");
  }
  const size_t d = x[0].size();
  for (const auto& row : x) {
    if (row.size() != d) {
      throw Error(ErrorCode::LengthMismatch, "ragged feature matrix");
    }
  }
  bool low = false, high = false;
  for (Label l : y) (l == Label::High ? high : low) = true;
  if (!low || !high) {
    throw Error(ErrorCode::OneClassOnly, "training set needs both classes");
  }
}

std::vector<double> to_rows(const MatrixXd& m) {
  std::vector<double> out(static_cast<size_t>(m.rows()) * m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<size_t>(r) * m.cols() + c] = m(r, c);
    }
  }
  return out;
}

MatrixXd from_rows(const std::vector<double>& v, size_t d) {
  MatrixXd m(d, d);
  for (size_t r = 0; r < d; ++r) {
    for (size_t c = 0; c < d; ++c) m(r, c) = v[r * d + c];
  }
  return m;
}

}  // namespace

LdaModel lda_fit(const FeatureMatrix& x, const std::vector<Label>& y, double shrinkage) {
  check_inputs(x, y);
  const size_t d = x[0].size();
  ClassStats low, high;
  accumulate(x, y, Label::Low, low);
  accumulate(x, y, Label::High, high);

  const long n = low.count + high.count;
  if (n <= 2) {
    throw Error(ErrorCode::TooFew, "LDA needs more rows than classes");
  }
  MatrixXd cov = (low.scatter + high.scatter) / static_cast<double>(n - 2);
  if (shrinkage > 0.0) {
    const double mu = cov.trace() / static_cast<double>(d);
    cov = (1.0 - shrinkage) * cov + shrinkage * mu * MatrixXd::Identity(d, d);
  }

  // Eigendecomposition pseudo-inverse: the feature set carries exact linear
  // dependencies (per-strand mass balance ties the concentration columns), so
  // the pooled covariance is rank-deficient by construction. Directions with
  // eigenvalues below the cutoff carry no usable variance and are dropped.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularCovariance, "covariance eigendecomposition failed");
  }
  const VectorXd& evals = eig.eigenvalues();
  const double max_eval = evals(d - 1);
  if (!(max_eval > 0.0)) {
    throw Error(ErrorCode::SingularCovariance,
                "no feature direction carries variance (degenerate features)");
  }
  const double cutoff = 1e-10 * max_eval;
  VectorXd inv_evals = VectorXd::Zero(d);
  for (size_t i = 0; i < d; ++i) {
    if (evals(i) > cutoff) inv_evals(i) = 1.0 / evals(i);
  }

  LdaModel m;
  m.shrinkage = shrinkage;
  m.prior_low = static_cast<double>(low.count) / static_cast<double>(n);
  m.prior_high = static_cast<double>(high.count) / static_cast<double>(n);
  m.mean_low.assign(low.mean.data(), low.mean.data() + d);
  m.mean_high.assign(high.mean.data(), high.mean.data() + d);
  m.pooled_cov = to_rows(cov);

  // score(x) = x' S^+ (mu_h - mu_l) - 1/2 (mu_h + mu_l)' S^+ (mu_h - mu_l)
  //            + log(pi_h / pi_l)
  const VectorXd diff = high.mean - low.mean;
  const VectorXd w =
      eig.eigenvectors() * (inv_evals.asDiagonal() * (eig.eigenvectors().transpose() * diff));
  m.weights.assign(w.data(), w.data() + d);
  m.bias = -0.5 * (high.mean + low.mean).dot(w) + std::log(m.prior_high / m.prior_low);
  return m;
}

double lda_score(const LdaModel& m, const std::vector<double>& x) {
  if (x.size() != m.dim()) {
    throw Error(ErrorCode::LengthMismatch, "feature width != model dim");
  }
  double s = m.bias;
  for (size_t c = 0; c < x.size(); ++c) s += m.weights[c] * x[c];
  return s;
}

Label lda_predict(const LdaModel& m, const std::vector<double>& x) {
  return lda_score(m, x) > 0.0 ? Label::High : Label::Low;
}

QdaModel qda_fit(const FeatureMatrix& x, const std::vector<Label>& y, double ridge) {
  check_inputs(x, y);
  const size_t d = x[0].size();
  ClassStats stats[2];
  accumulate(x, y, Label::Low, stats[0]);
  accumulate(x, y, Label::High, stats[1]);

  QdaModel m;
  m.ridge = ridge;
  const long n = stats[0].count + stats[1].count;
  m.prior_low = static_cast<double>(stats[0].count) / static_cast<double>(n);
  m.prior_high = static_cast<double>(stats[1].count) / static_cast<double>(n);

  for (int k = 0; k < 2; ++k) {
    if (stats[k].count < 2) {
      throw Error(ErrorCode::SingularCovariance,
                  "class covariance undefined with fewer than 2 rows");
    }
    MatrixXd cov = stats[k].scatter / static_cast<double>(stats[k].count - 1);
    cov += ridge * MatrixXd::Identity(d, d);
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularCovariance, "class covariance not positive definite");
    }
    double log_det = 0.0;
    const MatrixXd l = llt.matrixL();
    for (size_t c = 0; c < d; ++c) log_det += 2.0 * std::log(l(c, c));
    const MatrixXd inv = llt.solve(MatrixXd::Identity(d, d));
    auto& mean = (k == 0) ? m.mean_low : m.mean_high;
    auto& cov_out = (k == 0) ? m.cov_low : m.cov_high;
    auto& icov_out = (k == 0) ? m.icov_low : m.icov_high;
    auto& ld = (k == 0) ? m.log_det_low : m.log_det_high;
    mean.assign(stats[k].mean.data(), stats[k].mean.data() + d);
    cov_out = to_rows(cov);
    icov_out = to_rows(inv);
    ld = log_det;
  }
  return m;
}

namespace {

double qda_class_loglik(const std::vector<double>& x, const std::vector<double>& mean,
                        const std::vector<double>& icov, double log_det, double prior) {
  const size_t d = mean.size();
  double quad = 0.0;
  for (size_t r = 0; r < d; ++r) {
    double acc = 0.0;
    for (size_t c = 0; c < d; ++c) acc += icov[r * d + c] * (x[c] - mean[c]);
    quad += (x[r] - mean[r]) * acc;
  }
  return -0.5 * (log_det + quad) + std::log(prior);
}

}  // namespace

double qda_score(const QdaModel& m, const std::vector<double>& x) {
  if (x.size() != m.dim()) {
    throw Error(ErrorCode::LengthMismatch, "feature width != model dim");
  }
  return qda_class_loglik(x, m.mean_high, m.icov_high, m.log_det_high, m.prior_high) -
         qda_class_loglik(x, m.mean_low, m.icov_low, m.log_det_low, m.prior_low);
}

Label qda_predict(const QdaModel& m, const std::vector<double>& x) {
  return qda_score(m, x) > 0.0 ? Label::High : Label::Low;
}

namespace {

void write_vec(std::ostream& out, const char* name, const std::vector<double>& v) {
  out << name << ' ' << v.size();
  char buf[40];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, " %.17g", x);
    out << buf;
  }
  out << '\n';
}

std::vector<double> read_vec(std::istream& in, const char* name) {
  std::string key;
  size_t n = 0;
  if (!(in >> key >> n) || key != name) {
    throw Error(ErrorCode::ParseError, std::string("expected field ") + name);
  }
  std::vector<double> v(n);
  for (double& x : v) {
    if (!(in >> x)) {
      throw Error(ErrorCode::ParseError, std::string("short read in ") + name);
    }
  }
  return v;
}

}  // namespace

void save_lda(const LdaModel& m, std::ostream& out) {
  out << "lda v1\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "priors %.17g %.17g shrinkage %.17g bias %.17g\n",
                m.prior_low, m.prior_high, m.shrinkage, m.bias);
  out << buf;
  write_vec(out, "mean_low", m.mean_low);
  write_vec(out, "mean_high", m.mean_high);
  write_vec(out, "pooled_cov", m.pooled_cov);
  write_vec(out, "weights", m.weights);
}

LdaModel load_lda(std::istream& in) {
  std::string magic, version, key;
  in >> magic >> version;
  if (magic != "lda" || version != "v1") {
    throw Error(ErrorCode::ParseError, "not an LDA model file");
  }
  LdaModel m;
  in >> key >> m.prior_low >> m.prior_high;
  in >> key >> m.shrinkage >> key >> m.bias;
  m.mean_low = read_vec(in, "mean_low");
  m.mean_high = read_vec(in, "mean_high");
  m.pooled_cov = read_vec(in, "pooled_cov");
  m.weights = read_vec(in, "weights");
  if (!in) {
    throw Error(ErrorCode::ParseError, "truncated LDA model file");
  }
  return m;
}

void save_qda(const QdaModel& m, std::ostream& out) {
  out << "qda v1\n";
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "priors %.17g %.17g ridge %.17g log_det %.17g %.17g\n", m.prior_low,
                m.prior_high, m.ridge, m.log_det_low, m.log_det_high);
  out << buf;
  write_vec(out, "mean_low", m.mean_low);
  write_vec(out, "mean_high", m.mean_high);
  write_vec(out, "cov_low", m.cov_low);
  write_vec(out, "cov_high", m.cov_high);
  write_vec(out, "icov_low", m.icov_low);
  write_vec(out, "icov_high", m.icov_high);
}

QdaModel load_qda(std::istream& in) {
  std::string magic, version, key;
  in >> magic >> version;
  if (magic != "qda" || version != "v1") {
    throw Error(ErrorCode::ParseError, "not a QDA model file");
  }
  QdaModel m;
  in >> key >> m.prior_low >> m.prior_high;
  in >> key >> m.ridge >> key >> m.log_det_low >> m.log_det_high;
  m.mean_low = read_vec(in, "mean_low");
  m.mean_high = read_vec(in, "mean_high");
  m.cov_low = read_vec(in, "cov_low");
  m.cov_high = read_vec(in, "cov_high");
  m.icov_low = read_vec(in, "icov_low");
  m.icov_high = read_vec(in, "icov_high");
  if (!in) {
    throw Error(ErrorCode::ParseError, "truncated QDA model file");
  }
  return m;
}

}  // namespace hybseq
