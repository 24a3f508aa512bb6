#include "hybseq/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <sstream>

namespace hybseq {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

// Hot kernels. Long contiguous loops with restrict-qualified pointers so the
// compiler can vectorize them.

// Fixed-width SIMD lanes (GCC/Clang vector extension). The lane structure and
// tile order pin the floating-point summation order, so results stay
// bit-reproducible while the compiler maps the lanes onto whatever vector
// unit the target has.
typedef double vd8 __attribute__((vector_size(64)));

inline vd8 load8(const double* p) {
  vd8 v;
  __builtin_memcpy(&v, p, sizeof v);
  return v;
}

inline double hsum(vd8 v) {
  return ((v[0] + v[4]) + (v[1] + v[5])) + ((v[2] + v[6]) + (v[3] + v[7]));
}

inline double dot(const double* __restrict__ a, const double* __restrict__ b, int n) {
  vd8 acc = {};
  int i = 0;
  for (; i + 8 <= n; i += 8) acc += load8(a + i) * load8(b + i);
  double out = hsum(acc);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

inline void axpy(double coef, const double* __restrict__ x, double* __restrict__ y,
                 int n) {
  for (int i = 0; i < n; ++i) y[i] += coef * x[i];
}

inline double sum(const double* __restrict__ x, int n) {
  vd8 acc = {};
  int i = 0;
  for (; i + 8 <= n; i += 8) acc += load8(x + i);
  double out = hsum(acc);
  for (; i < n; ++i) out += x[i];
  return out;
}

// C[M][N] (+)= A . B^T where both operands hold K-contiguous rows:
// C[m][n] = dot(A[m], B[n]). Register-tiled 4x4 over K lanes with the B rows
// blocked to stay L2-resident across the A-row sweep.
struct RowDotGemm {
  int m = 0, n = 0, k = 0;
  const double* a = nullptr;  // [m][k]
  const double* b = nullptr;  // [n][k]
  double* c = nullptr;        // [m][n]
  bool accumulate = false;

  static constexpr int kTile = 4;

  void tile4x4(const double* __restrict__ a0, const double* __restrict__ a1,
               const double* __restrict__ a2, const double* __restrict__ a3,
               const double* __restrict__ b0, const double* __restrict__ b1,
               const double* __restrict__ b2, const double* __restrict__ b3,
               double out[kTile][kTile]) const {
    vd8 acc00 = {}, acc01 = {}, acc02 = {}, acc03 = {};
    vd8 acc10 = {}, acc11 = {}, acc12 = {}, acc13 = {};
    vd8 acc20 = {}, acc21 = {}, acc22 = {}, acc23 = {};
    vd8 acc30 = {}, acc31 = {}, acc32 = {}, acc33 = {};
    int i = 0;
    for (; i + 8 <= k; i += 8) {
      const vd8 va0 = load8(a0 + i), va1 = load8(a1 + i);
      const vd8 va2 = load8(a2 + i), va3 = load8(a3 + i);
      const vd8 vb0 = load8(b0 + i), vb1 = load8(b1 + i);
      const vd8 vb2 = load8(b2 + i), vb3 = load8(b3 + i);
      acc00 += va0 * vb0;
      acc01 += va0 * vb1;
      acc02 += va0 * vb2;
      acc03 += va0 * vb3;
      acc10 += va1 * vb0;
      acc11 += va1 * vb1;
      acc12 += va1 * vb2;
      acc13 += va1 * vb3;
      acc20 += va2 * vb0;
      acc21 += va2 * vb1;
      acc22 += va2 * vb2;
      acc23 += va2 * vb3;
      acc30 += va3 * vb0;
      acc31 += va3 * vb1;
      acc32 += va3 * vb2;
      acc33 += va3 * vb3;
    }
    out[0][0] = hsum(acc00), out[0][1] = hsum(acc01);
    out[0][2] = hsum(acc02), out[0][3] = hsum(acc03);
    out[1][0] = hsum(acc10), out[1][1] = hsum(acc11);
    out[1][2] = hsum(acc12), out[1][3] = hsum(acc13);
    out[2][0] = hsum(acc20), out[2][1] = hsum(acc21);
    out[2][2] = hsum(acc22), out[2][3] = hsum(acc23);
    out[3][0] = hsum(acc30), out[3][1] = hsum(acc31);
    out[3][2] = hsum(acc32), out[3][3] = hsum(acc33);
    for (; i < k; ++i) {
      const double bs[4] = {b0[i], b1[i], b2[i], b3[i]};
      out[0][0] += a0[i] * bs[0], out[0][1] += a0[i] * bs[1];
      out[0][2] += a0[i] * bs[2], out[0][3] += a0[i] * bs[3];
      out[1][0] += a1[i] * bs[0], out[1][1] += a1[i] * bs[1];
      out[1][2] += a1[i] * bs[2], out[1][3] += a1[i] * bs[3];
      out[2][0] += a2[i] * bs[0], out[2][1] += a2[i] * bs[1];
      out[2][2] += a2[i] * bs[2], out[2][3] += a2[i] * bs[3];
      out[3][0] += a3[i] * bs[0], out[3][1] += a3[i] * bs[1];
      out[3][2] += a3[i] * bs[2], out[3][3] += a3[i] * bs[3];
    }
  }

  void run() const {
    // B-row block sized for ~0.5 MB of L2 residency.
    const int block_rows = std::max(kTile, static_cast<int>(
        (512 * 1024) / (static_cast<size_t>(k) * sizeof(double)) & ~3u));
    for (int nb = 0; nb < n; nb += block_rows) {
      const int ne = std::min(n, nb + block_rows);
      int mi = 0;
      for (; mi + kTile <= m; mi += kTile) {
        const double* a0 = a + static_cast<size_t>(mi) * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        int ni = nb;
        for (; ni + kTile <= ne; ni += kTile) {
          const double* b0 = b + static_cast<size_t>(ni) * k;
          double out[kTile][kTile];
          tile4x4(a0, a1, a2, a3, b0, b0 + k, b0 + 2 * k, b0 + 3 * k, out);
          for (int r = 0; r < kTile; ++r) {
            double* crow = c + static_cast<size_t>(mi + r) * n + ni;
            for (int s = 0; s < kTile; ++s) {
              crow[s] = accumulate ? crow[s] + out[r][s] : out[r][s];
            }
          }
        }
        for (; ni < ne; ++ni) {
          const double* brow = b + static_cast<size_t>(ni) * k;
          for (int r = 0; r < kTile; ++r) {
            double* slot = c + static_cast<size_t>(mi + r) * n + ni;
            const double v = dot(a + static_cast<size_t>(mi + r) * k, brow, k);
            *slot = accumulate ? *slot + v : v;
          }
        }
      }
      for (; mi < m; ++mi) {
        const double* arow = a + static_cast<size_t>(mi) * k;
        for (int ni = nb; ni < ne; ++ni) {
          double* slot = c + static_cast<size_t>(mi) * n + ni;
          const double v = dot(arow, b + static_cast<size_t>(ni) * k, k);
          *slot = accumulate ? *slot + v : v;
        }
      }
    }
  }
};

// Blocked out-of-place transpose: dst[j][i] = src[i][j], src is rows x cols.
void transpose(const double* __restrict__ src, int rows, int cols,
               double* __restrict__ dst) {
  constexpr int kT = 16;
  for (int i0 = 0; i0 < rows; i0 += kT) {
    const int i1 = std::min(rows, i0 + kT);
    for (int j0 = 0; j0 < cols; j0 += kT) {
      const int j1 = std::min(cols, j0 + kT);
      for (int i = i0; i < i1; ++i) {
        for (int j = j0; j < j1; ++j) {
          dst[static_cast<size_t>(j) * rows + i] = src[static_cast<size_t>(i) * cols + j];
        }
      }
    }
  }
}

// Patch matrix layout: col[p][cin * kernel] for output position p. The
// convolutions below run as plain dot products against it.
void im2col_1d(const double* __restrict__ x, int cin, int win, int k, int wout,
               double* __restrict__ col) {
  for (int p = 0; p < wout; ++p) {
    double* row = col + static_cast<size_t>(p) * cin * k;
    for (int ci = 0; ci < cin; ++ci) {
      std::memcpy(row + static_cast<size_t>(ci) * k, x + static_cast<size_t>(ci) * win + p,
                  static_cast<size_t>(k) * sizeof(double));
    }
  }
}

void col2im_1d(const double* __restrict__ col, int cin, int win, int k, int wout,
               double* __restrict__ dx) {
  for (int p = 0; p < wout; ++p) {
    const double* row = col + static_cast<size_t>(p) * cin * k;
    for (int ci = 0; ci < cin; ++ci) {
      double* dst = dx + static_cast<size_t>(ci) * win + p;
      const double* src = row + static_cast<size_t>(ci) * k;
      for (int t = 0; t < k; ++t) dst[t] += src[t];
    }
  }
}

// Shared conv core over the whole batch. Patches from every sample form one
// matrix col[N][patch] (N = batch * positions); the forward pass is the
// row-dot GEMM Y[out][N] = W . col^T, and the backward pass reuses the same
// kernel for dW = dY . col and dcol = dY^T . W via explicit transposes.
struct ConvCore {
  int patch = 0;      // cin * kernel elements
  int positions = 0;  // output positions per sample

  size_t n_total(int batch) const { return static_cast<size_t>(batch) * positions; }

  // y: [out_ch][N] staging, scattered by the caller.
  void forward(const double* col, const double* weight, const double* bias, int out_ch,
               size_t n, double* y) const {
    RowDotGemm{out_ch, static_cast<int>(n), patch, weight, col, y, false}.run();
    for (int co = 0; co < out_ch; ++co) {
      double* yo = y + static_cast<size_t>(co) * n;
      const double b = bias[co];
      for (size_t j = 0; j < n; ++j) yo[j] += b;
    }
  }

  void backward(const double* col, const double* weight, const double* dy, int out_ch,
                size_t n, double* dweight, double* dbias, double* dcol) const {
    for (int co = 0; co < out_ch; ++co) {
      dbias[co] += sum(dy + static_cast<size_t>(co) * n, static_cast<int>(n));
    }
    // Staging blocks are fully overwritten; skip value-initialization.
    std::unique_ptr<double[]> col_t(new double[static_cast<size_t>(patch) * n]);
    transpose(col, static_cast<int>(n), patch, col_t.get());
    RowDotGemm{out_ch, patch, static_cast<int>(n), dy, col_t.get(), dweight, true}.run();
    col_t.reset();

    std::unique_ptr<double[]> dy_t(new double[static_cast<size_t>(n) * out_ch]);
    transpose(dy, out_ch, static_cast<int>(n), dy_t.get());
    std::unique_ptr<double[]> w_t(new double[static_cast<size_t>(patch) * out_ch]);
    transpose(weight, out_ch, patch, w_t.get());
    RowDotGemm{static_cast<int>(n), patch, out_ch, dy_t.get(), w_t.get(), dcol, false}
        .run();
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Conv2D

Conv2D::Conv2D(int in_ch, int out_ch, int kh, int kw)
    : weight_({out_ch, in_ch, kh, kw}),
      bias_({out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      kh_(kh),
      kw_(kw) {}

std::string Conv2D::describe() const {
  std::ostringstream out;
  out << "conv2d " << in_ch_ << ' ' << out_ch_ << ' ' << kh_ << ' ' << kw_;
  return out.str();
}

std::vector<int> Conv2D::out_shape(const std::vector<int>& in) const {
  require(in.size() == 4 && in[1] == in_ch_ && in[2] >= kh_ && in[3] >= kw_,
          "conv2d expects [B," + std::to_string(in_ch_) + ",H>=" + std::to_string(kh_) +
              ",W>=" + std::to_string(kw_) + "], got " + shape_str(in));
  return {in[0], out_ch_, in[2] - kh_ + 1, in[3] - kw_ + 1};
}

namespace {

void im2col_2d(const double* __restrict__ x, int cin, int h, int w, int kh, int kw,
               int oh, int ow, double* __restrict__ col) {
  // Patch layout [ci][kh][kw], positions row-major [r][c].
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double* row = col + (static_cast<size_t>(r) * ow + c) * cin * kh * kw;
      for (int ci = 0; ci < cin; ++ci) {
        for (int fr = 0; fr < kh; ++fr) {
          std::memcpy(row + (static_cast<size_t>(ci) * kh + fr) * kw,
                      x + (static_cast<size_t>(ci) * h + r + fr) * w + c,
                      static_cast<size_t>(kw) * sizeof(double));
        }
      }
    }
  }
}

void col2im_2d(const double* __restrict__ col, int cin, int h, int w, int kh, int kw,
               int oh, int ow, double* __restrict__ dx) {
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      const double* row = col + (static_cast<size_t>(r) * ow + c) * cin * kh * kw;
      for (int ci = 0; ci < cin; ++ci) {
        for (int fr = 0; fr < kh; ++fr) {
          double* dst = dx + (static_cast<size_t>(ci) * h + r + fr) * w + c;
          const double* src = row + (static_cast<size_t>(ci) * kh + fr) * kw;
          for (int t = 0; t < kw; ++t) dst[t] += src[t];
        }
      }
    }
  }
}

}  // namespace

namespace {

// [b][co][p] <-> [co][b * positions + p] staging for the batch-level GEMM.
void scatter_outputs(const double* __restrict__ tmp, int batch, int out_ch,
                     int positions, size_t n, double* __restrict__ y) {
  for (int b = 0; b < batch; ++b) {
    for (int co = 0; co < out_ch; ++co) {
      std::memcpy(y + (static_cast<size_t>(b) * out_ch + co) * positions,
                  tmp + static_cast<size_t>(co) * n + static_cast<size_t>(b) * positions,
                  static_cast<size_t>(positions) * sizeof(double));
    }
  }
}

void gather_grads(const double* __restrict__ dy, int batch, int out_ch, int positions,
                  size_t n, double* __restrict__ tmp) {
  for (int b = 0; b < batch; ++b) {
    for (int co = 0; co < out_ch; ++co) {
      std::memcpy(tmp + static_cast<size_t>(co) * n + static_cast<size_t>(b) * positions,
                  dy + (static_cast<size_t>(b) * out_ch + co) * positions,
                  static_cast<size_t>(positions) * sizeof(double));
    }
  }
}

}  // namespace

Tensor Conv2D::forward(const Tensor& x, Mode mode, Rng*) {
  Tensor y(out_shape(x.shape));
  const int batch = x.shape[0], h = x.shape[2], w = x.shape[3];
  const int oh = y.shape[2], ow = y.shape[3];

  ConvCore core{in_ch_ * kh_ * kw_, oh * ow};
  const size_t n = core.n_total(batch);
  scratch_.resize(n * core.patch);
  const size_t x_stride = static_cast<size_t>(in_ch_) * h * w;
  for (int b = 0; b < batch; ++b) {
    im2col_2d(x.val.data() + b * x_stride, in_ch_, h, w, kh_, kw_, oh, ow,
              scratch_.data() + static_cast<size_t>(b) * core.positions * core.patch);
  }
  std::unique_ptr<double[]> tmp(new double[static_cast<size_t>(out_ch_) * n]);
  core.forward(scratch_.data(), weight_.val.data(), bias_.val.data(), out_ch_, n,
               tmp.get());
  scatter_outputs(tmp.get(), batch, out_ch_, core.positions, n, y.val.data());
  if (mode == Mode::Train) {
    cached_in_shape_ = x.shape;  // the col matrix in scratch_ feeds backward
  }
  return y;
}

Tensor Conv2D::backward(const Tensor& dy) {
  require(!cached_in_shape_.empty(), "conv2d backward before train-mode forward");
  const int batch = cached_in_shape_[0], h = cached_in_shape_[2], w = cached_in_shape_[3];
  const int oh = dy.shape[2], ow = dy.shape[3];
  weight_.ensure_grad();
  bias_.ensure_grad();
  Tensor dx(cached_in_shape_);

  ConvCore core{in_ch_ * kh_ * kw_, oh * ow};
  const size_t n = core.n_total(batch);
  std::unique_ptr<double[]> tmp(new double[static_cast<size_t>(out_ch_) * n]);
  gather_grads(dy.val.data(), batch, out_ch_, core.positions, n, tmp.get());
  std::unique_ptr<double[]> dcol(new double[n * core.patch]);
  core.backward(scratch_.data(), weight_.val.data(), tmp.get(), out_ch_, n,
                weight_.grad.data(), bias_.grad.data(), dcol.get());
  const size_t x_stride = static_cast<size_t>(in_ch_) * h * w;
  for (int b = 0; b < batch; ++b) {
    col2im_2d(dcol.get() + static_cast<size_t>(b) * core.positions * core.patch, in_ch_,
              h, w, kh_, kw_, oh, ow, dx.val.data() + b * x_stride);
  }
  cached_in_shape_.clear();
  return dx;
}

// ---------------------------------------------------------------------------
// Conv1D

Conv1D::Conv1D(int in_ch, int out_ch, int k)
    : weight_({out_ch, in_ch, k}), bias_({out_ch}), in_ch_(in_ch), out_ch_(out_ch), k_(k) {}

std::string Conv1D::describe() const {
  std::ostringstream out;
  out << "conv1d " << in_ch_ << ' ' << out_ch_ << ' ' << k_;
  return out.str();
}

std::vector<int> Conv1D::out_shape(const std::vector<int>& in) const {
  std::vector<int> norm = in;
  if (norm.size() == 4) {
    require(norm[2] == 1, "conv1d on rank-4 input needs H == 1, got " + shape_str(in));
    norm = {norm[0], norm[1], norm[3]};
  }
  require(norm.size() == 3 && norm[1] == in_ch_ && norm[2] >= k_,
          "conv1d expects [B," + std::to_string(in_ch_) + ",W>=" + std::to_string(k_) +
              "], got " + shape_str(in));
  return {norm[0], out_ch_, norm[2] - k_ + 1};
}

Tensor Conv1D::forward(const Tensor& x, Mode mode, Rng*) {
  Tensor y(out_shape(x.shape));
  orig_shape_ = x.shape;
  const int batch = y.shape[0];
  const int win = x.shape.back();
  const int wout = y.shape[2];

  ConvCore core{in_ch_ * k_, wout};
  const size_t n = core.n_total(batch);
  scratch_.resize(n * core.patch);
  const size_t x_stride = static_cast<size_t>(in_ch_) * win;
  for (int b = 0; b < batch; ++b) {
    im2col_1d(x.val.data() + b * x_stride, in_ch_, win, k_, wout,
              scratch_.data() + static_cast<size_t>(b) * core.positions * core.patch);
  }
  std::unique_ptr<double[]> tmp(new double[static_cast<size_t>(out_ch_) * n]);
  core.forward(scratch_.data(), weight_.val.data(), bias_.val.data(), out_ch_, n,
               tmp.get());
  scatter_outputs(tmp.get(), batch, out_ch_, core.positions, n, y.val.data());
  if (mode == Mode::Train) {
    cached_in_shape_ = x.shape;  // the col matrix in scratch_ feeds backward
  }
  return y;
}

Tensor Conv1D::backward(const Tensor& dy) {
  require(!cached_in_shape_.empty(), "conv1d backward before train-mode forward");
  const int batch = dy.shape[0];
  const int win = cached_in_shape_.back();
  const int wout = dy.shape[2];
  weight_.ensure_grad();
  bias_.ensure_grad();
  Tensor dx(cached_in_shape_);

  ConvCore core{in_ch_ * k_, wout};
  const size_t n = core.n_total(batch);
  std::unique_ptr<double[]> tmp(new double[static_cast<size_t>(out_ch_) * n]);
  gather_grads(dy.val.data(), batch, out_ch_, core.positions, n, tmp.get());
  std::unique_ptr<double[]> dcol(new double[n * core.patch]);
  core.backward(scratch_.data(), weight_.val.data(), tmp.get(), out_ch_, n,
                weight_.grad.data(), bias_.grad.data(), dcol.get());
  const size_t x_stride = static_cast<size_t>(in_ch_) * win;
  for (int b = 0; b < batch; ++b) {
    col2im_1d(dcol.get() + static_cast<size_t>(b) * core.positions * core.patch, in_ch_,
              win, k_, wout, dx.val.data() + b * x_stride);
  }
  cached_in_shape_.clear();
  Tensor out = std::move(dx);
  out.shape = orig_shape_;  // restore a rank-4 view if that is what came in
  return out;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(int in_dim, int out_dim)
    : weight_({out_dim, in_dim}), bias_({out_dim}), in_dim_(in_dim), out_dim_(out_dim) {}

std::string Dense::describe() const {
  std::ostringstream out;
  out << "dense " << in_dim_ << ' ' << out_dim_;
  return out.str();
}

std::vector<int> Dense::out_shape(const std::vector<int>& in) const {
  require(in.size() == 2 && in[1] == in_dim_,
          "dense expects [B," + std::to_string(in_dim_) + "], got " + shape_str(in));
  return {in[0], out_dim_};
}

Tensor Dense::forward(const Tensor& x, Mode mode, Rng*) {
  Tensor y(out_shape(x.shape));
  const int batch = x.shape[0];
  if (mode == Mode::Train) cached_x_ = x;
  for (int b = 0; b < batch; ++b) {
    const double* xr = x.val.data() + static_cast<size_t>(b) * in_dim_;
    double* yr = y.val.data() + static_cast<size_t>(b) * out_dim_;
    for (int o = 0; o < out_dim_; ++o) {
      yr[o] = bias_.val[o] +
              dot(weight_.val.data() + static_cast<size_t>(o) * in_dim_, xr, in_dim_);
    }
  }
  return y;
}

Tensor Dense::backward(const Tensor& dy) {
  require(!cached_x_.val.empty(), "dense backward before train-mode forward");
  const Tensor& x = cached_x_;
  const int batch = x.shape[0];
  weight_.ensure_grad();
  bias_.ensure_grad();
  Tensor dx(x.shape);
  for (int b = 0; b < batch; ++b) {
    const double* xr = x.val.data() + static_cast<size_t>(b) * in_dim_;
    const double* dyr = dy.val.data() + static_cast<size_t>(b) * out_dim_;
    double* dxr = dx.val.data() + static_cast<size_t>(b) * in_dim_;
    for (int o = 0; o < out_dim_; ++o) {
      const double g = dyr[o];
      bias_.grad[o] += g;
      if (g == 0.0) continue;
      axpy(g, xr, weight_.grad.data() + static_cast<size_t>(o) * in_dim_, in_dim_);
      axpy(g, weight_.val.data() + static_cast<size_t>(o) * in_dim_, dxr, in_dim_);
    }
  }
  cached_x_ = Tensor();
  return dx;
}

// ---------------------------------------------------------------------------
// Activations

Tensor ReLU::forward(const Tensor& x, Mode mode, Rng*) {
  Tensor y = x;
  if (mode == Mode::Train) {
    active_.resize(x.numel());
    for (size_t i = 0; i < y.val.size(); ++i) {
      active_[i] = y.val[i] > 0.0;
      if (!active_[i]) y.val[i] = 0.0;
    }
  } else {
    for (double& v : y.val) {
      if (v < 0.0) v = 0.0;
    }
  }
  return y;
}

Tensor ReLU::backward(const Tensor& dy) {
  require(active_.size() == dy.numel(), "relu backward before train-mode forward");
  Tensor dx = dy;
  for (size_t i = 0; i < dx.val.size(); ++i) {
    if (!active_[i]) dx.val[i] = 0.0;
  }
  return dx;
}

Tensor Sigmoid::forward(const Tensor& x, Mode mode, Rng*) {
  Tensor y = x;
  for (double& v : y.val) v = 1.0 / (1.0 + std::exp(-v));
  if (mode == Mode::Train) cached_y_ = y.val;
  return y;
}

Tensor Sigmoid::backward(const Tensor& dy) {
  require(cached_y_.size() == dy.numel(), "sigmoid backward before train-mode forward");
  Tensor dx = dy;
  for (size_t i = 0; i < dx.val.size(); ++i) {
    dx.val[i] *= cached_y_[i] * (1.0 - cached_y_[i]);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(int channels, double momentum, double eps)
    : gamma_({channels}),
      beta_({channels}),
      running_mean_({channels}),
      running_var_({channels}),
      channels_(channels),
      momentum_(momentum),
      eps_(eps) {
  std::fill(gamma_.val.begin(), gamma_.val.end(), 1.0);
  std::fill(running_var_.val.begin(), running_var_.val.end(), 1.0);
}

std::string BatchNorm::describe() const {
  std::ostringstream out;
  out << "batchnorm " << channels_ << ' ' << momentum_ << ' ' << eps_;
  return out.str();
}

std::vector<int> BatchNorm::out_shape(const std::vector<int>& in) const {
  require(in.size() >= 2 && in[1] == channels_,
          "batchnorm expects [B," + std::to_string(channels_) + ",...], got " +
              shape_str(in));
  return in;
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode, Rng*) {
  out_shape(x.shape);
  Tensor y(x.shape);
  batch_ = static_cast<size_t>(x.shape[0]);
  spatial_ = 1;
  for (size_t i = 2; i < x.shape.size(); ++i) spatial_ *= static_cast<size_t>(x.shape[i]);
  const size_t stride = static_cast<size_t>(channels_) * spatial_;
  const int sp = static_cast<int>(spatial_);

  if (mode == Mode::Eval) {
    for (size_t b = 0; b < batch_; ++b) {
      for (int c = 0; c < channels_; ++c) {
        const double inv = 1.0 / std::sqrt(running_var_.val[c] + eps_);
        const double mean = running_mean_.val[c];
        const double g = gamma_.val[c] * inv, shift = beta_.val[c] - mean * g;
        const double* __restrict__ xs = x.val.data() + b * stride + c * spatial_;
        double* __restrict__ ys = y.val.data() + b * stride + c * spatial_;
        for (int s = 0; s < sp; ++s) ys[s] = xs[s] * g + shift;
      }
    }
    return y;
  }

  cached_shape_ = x.shape;
  xhat_.resize(x.numel());
  invstd_.assign(channels_, 0.0);
  const double n = static_cast<double>(batch_ * spatial_);

  // Memory-order passes: accumulate per-channel sums while streaming.
  std::vector<double> mean(channels_, 0.0), varsum(channels_, 0.0);
  for (size_t b = 0; b < batch_; ++b) {
    for (int c = 0; c < channels_; ++c) {
      mean[c] += sum(x.val.data() + b * stride + c * spatial_, sp);
    }
  }
  for (int c = 0; c < channels_; ++c) mean[c] /= n;
  for (size_t b = 0; b < batch_; ++b) {
    for (int c = 0; c < channels_; ++c) {
      const double* __restrict__ xs = x.val.data() + b * stride + c * spatial_;
      const double m = mean[c];
      double acc = 0;
      for (int s = 0; s < sp; ++s) {
        const double d = xs[s] - m;
        acc += d * d;
      }
      varsum[c] += acc;
    }
  }
  for (int c = 0; c < channels_; ++c) {
    const double var = varsum[c] / n;  // biased, used for normalization
    invstd_[c] = 1.0 / std::sqrt(var + eps_);
    const double unbiased = (n > 1.0) ? varsum[c] / (n - 1.0) : var;
    running_mean_.val[c] = (1.0 - momentum_) * running_mean_.val[c] + momentum_ * mean[c];
    running_var_.val[c] = (1.0 - momentum_) * running_var_.val[c] + momentum_ * unbiased;
  }
  for (size_t b = 0; b < batch_; ++b) {
    for (int c = 0; c < channels_; ++c) {
      const double* __restrict__ xs = x.val.data() + b * stride + c * spatial_;
      double* __restrict__ ys = y.val.data() + b * stride + c * spatial_;
      double* __restrict__ hs = xhat_.data() + b * stride + c * spatial_;
      const double m = mean[c], inv = invstd_[c];
      const double g = gamma_.val[c], bta = beta_.val[c];
      for (int s = 0; s < sp; ++s) {
        const double h = (xs[s] - m) * inv;
        hs[s] = h;
        ys[s] = h * g + bta;
      }
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
  require(!cached_shape_.empty() && dy.shape == cached_shape_,
          "batchnorm backward before train-mode forward");
  gamma_.ensure_grad();
  beta_.ensure_grad();
  Tensor dx(dy.shape);
  const size_t stride = static_cast<size_t>(channels_) * spatial_;
  const int sp = static_cast<int>(spatial_);
  const double n = static_cast<double>(batch_ * spatial_);

  std::vector<double> sum_dy(channels_, 0.0), sum_dyh(channels_, 0.0);
  for (size_t b = 0; b < batch_; ++b) {
    for (int c = 0; c < channels_; ++c) {
      const double* __restrict__ dys = dy.val.data() + b * stride + c * spatial_;
      const double* __restrict__ hs = xhat_.data() + b * stride + c * spatial_;
      double a0 = 0, a1 = 0;
      for (int s = 0; s < sp; ++s) {
        a0 += dys[s];
        a1 += dys[s] * hs[s];
      }
      sum_dy[c] += a0;
      sum_dyh[c] += a1;
    }
  }
  for (int c = 0; c < channels_; ++c) {
    gamma_.grad[c] += sum_dyh[c];
    beta_.grad[c] += sum_dy[c];
  }
  for (size_t b = 0; b < batch_; ++b) {
    for (int c = 0; c < channels_; ++c) {
      const double* __restrict__ dys = dy.val.data() + b * stride + c * spatial_;
      const double* __restrict__ hs = xhat_.data() + b * stride + c * spatial_;
      double* __restrict__ dxs = dx.val.data() + b * stride + c * spatial_;
      const double k1 = gamma_.val[c] * invstd_[c] / n;
      const double sdy = sum_dy[c], sdyh = sum_dyh[c];
      for (int s = 0; s < sp; ++s) {
        dxs[s] = k1 * (n * dys[s] - sdy - hs[s] * sdyh);
      }
    }
  }
  cached_shape_.clear();
  return dx;
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(double p) : p_(p) {
  if (p < 0.0 || p >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "dropout probability must be in [0, 1)");
  }
}

std::string Dropout::describe() const {
  std::ostringstream out;
  out << "dropout " << p_;
  return out.str();
}

Tensor Dropout::forward(const Tensor& x, Mode mode, Rng* rng) {
  if (mode == Mode::Eval || p_ == 0.0) {
    last_was_identity_ = true;
    return x;
  }
  if (!frozen_ || mask_.size() != x.numel()) {
    require(rng != nullptr, "train-mode dropout needs an rng");
    mask_.resize(x.numel());
    for (auto& m : mask_) m = rng->uniform() >= p_;
  }
  last_was_identity_ = false;
  const double scale = 1.0 / (1.0 - p_);
  Tensor y = x;
  for (size_t i = 0; i < y.val.size(); ++i) {
    y.val[i] = mask_[i] ? y.val[i] * scale : 0.0;
  }
  return y;
}

Tensor Dropout::backward(const Tensor& dy) {
  if (last_was_identity_) return dy;
  require(mask_.size() == dy.numel(), "dropout backward shape mismatch");
  const double scale = 1.0 / (1.0 - p_);
  Tensor dx = dy;
  for (size_t i = 0; i < dx.val.size(); ++i) {
    dx.val[i] = mask_[i] ? dx.val[i] * scale : 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Flatten

std::vector<int> Flatten::out_shape(const std::vector<int>& in) const {
  require(in.size() >= 2, "flatten expects a batched input");
  int flat = 1;
  for (size_t i = 1; i < in.size(); ++i) flat *= in[i];
  return {in[0], flat};
}

Tensor Flatten::forward(const Tensor& x, Mode, Rng*) {
  orig_shape_ = x.shape;
  Tensor y = x;
  y.shape = out_shape(x.shape);
  return y;
}

Tensor Flatten::backward(const Tensor& dy) {
  Tensor dx = dy;
  dx.shape = orig_shape_;
  return dx;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

const std::vector<int>& check_pred_shape(const Tensor& pred, size_t n) {
  const bool ok_rank = pred.shape.size() == 1 ||
                       (pred.shape.size() == 2 && pred.shape[1] == 1);
  if (!ok_rank || pred.numel() != n) {
    throw Error(ErrorCode::ShapeMismatch,
                "loss expects predictions [B] or [B,1] matching the target count");
  }
  return pred.shape;
}

}  // namespace

LossValue mse_loss(const Tensor& pred, const std::vector<double>& target) {
  check_pred_shape(pred, target.size());
  LossValue out;
  out.grad = Tensor(pred.shape);
  const double inv_n = 1.0 / static_cast<double>(target.size());
  for (size_t i = 0; i < target.size(); ++i) {
    const double d = pred.val[i] - target[i];
    out.value += d * d;
    out.grad.val[i] = 2.0 * d * inv_n;
  }
  out.value *= inv_n;
  return out;
}

LossValue bce_loss(const Tensor& pred, const std::vector<double>& target) {
  check_pred_shape(pred, target.size());
  LossValue out;
  out.grad = Tensor(pred.shape);
  constexpr double kEps = 1e-12;
  const double inv_n = 1.0 / static_cast<double>(target.size());
  for (size_t i = 0; i < target.size(); ++i) {
    const double p = std::clamp(pred.val[i], kEps, 1.0 - kEps);
    const double t = target[i];
    out.value -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    out.grad.val[i] = (p - t) / (p * (1.0 - p)) * inv_n;
  }
  out.value *= inv_n;
  return out;
}

}  // namespace hybseq
