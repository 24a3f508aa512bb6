#include "hybseq/align.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

namespace hybseq {

namespace {

constexpr int kNegInf = std::numeric_limits<int>::min() / 4;

inline int sub_score(char x, char y, const AlignParams& p) {
  return x == y ? p.match : p.mismatch;
}

// State matrices of the affine DP. M: column (i,j) is a diagonal;
// X: gap in b (consumes a, "up"); Y: gap in a (consumes b, "left").
struct Matrices {
  int n, m;
  std::vector<int> mm, xx, yy;
  int& M(int i, int j) { return mm[static_cast<size_t>(i) * (m + 1) + j]; }
  int& X(int i, int j) { return xx[static_cast<size_t>(i) * (m + 1) + j]; }
  int& Y(int i, int j) { return yy[static_cast<size_t>(i) * (m + 1) + j]; }
};

void fill(Matrices& dp, const DnaSeq& a, const DnaSeq& b, const AlignParams& p) {
  const int n = dp.n, m = dp.m;
  const size_t cells = static_cast<size_t>(n + 1) * (m + 1);
  dp.mm.assign(cells, kNegInf);
  dp.xx.assign(cells, kNegInf);
  dp.yy.assign(cells, kNegInf);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      // Leading gaps are free: the borders act as score 0.
      const int diag = (i == 1 || j == 1)
                           ? 0
                           : std::max({dp.M(i - 1, j - 1), dp.X(i - 1, j - 1),
                                       dp.Y(i - 1, j - 1)});
      dp.M(i, j) = diag + sub_score(a[i - 1], b[j - 1], p);

      const int up_m = (i == 1) ? 0 : dp.M(i - 1, j);
      const int up_x = (i == 1) ? kNegInf : dp.X(i - 1, j);
      const int up_y = (i == 1) ? kNegInf : dp.Y(i - 1, j);
      dp.X(i, j) = std::max({up_m - p.gap_open, up_x - p.gap_extend, up_y - p.gap_open});

      const int left_m = (j == 1) ? 0 : dp.M(i, j - 1);
      const int left_x = (j == 1) ? kNegInf : dp.X(i, j - 1);
      const int left_y = (j == 1) ? kNegInf : dp.Y(i, j - 1);
      dp.Y(i, j) = std::max({left_m - p.gap_open, left_y - p.gap_extend, left_x - p.gap_open});
    }
  }
}

// Trailing gaps are free: the answer lives on the last row or column, and the
// empty alignment (score 0) is always available.
struct EndCell {
  int score = 0;
  int i = 0, j = 0;
  int state = -1;  // 0 = M, 1 = X, 2 = Y, -1 = empty alignment
};

EndCell best_end(Matrices& dp) {
  EndCell best;
  auto consider = [&](int i, int j) {
    const int states[3] = {dp.M(i, j), dp.X(i, j), dp.Y(i, j)};
    for (int s = 0; s < 3; ++s) {
      if (states[s] > best.score) {
        best = {states[s], i, j, s};
      }
    }
  };
  // Scan order pins the tie-break: prefer endings closer to the corner.
  for (int j = dp.m; j >= 1; --j) consider(dp.n, j);
  for (int i = dp.n; i >= 1; --i) consider(i, dp.m);
  return best;
}

}  // namespace

void AlignParams::validate() const {
  if (gap_open < gap_extend || gap_extend < 0 || match <= mismatch) {
    throw Error(ErrorCode::InvalidArgument, "alignment parameters out of order");
  }
}

int semi_global_score(const DnaSeq& a, const DnaSeq& b, const AlignParams& p) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptySequence, "alignment needs non-empty sequences");
  }
  Matrices dp{static_cast<int>(a.size()), static_cast<int>(b.size()), {}, {}, {}};
  fill(dp, a, b, p);
  return best_end(dp).score;
}

AlignResult semi_global_trace(const DnaSeq& a, const DnaSeq& b, const AlignParams& p) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptySequence, "alignment needs non-empty sequences");
  }
  Matrices dp{static_cast<int>(a.size()), static_cast<int>(b.size()), {}, {}, {}};
  fill(dp, a, b, p);
  const EndCell end = best_end(dp);

  AlignResult out;
  out.score = end.score;

  // Core columns from the end cell back to a border, newest first.
  std::string col_a, col_b;
  int i = end.i, j = end.j, state = end.state;
  while (state >= 0 && i >= 1 && j >= 1) {
    if (state == 0) {
      col_a.push_back(a[i - 1]);
      col_b.push_back(b[j - 1]);
      if (i == 1 || j == 1) {
        --i, --j;
        break;
      }
      const int vals[3] = {dp.M(i - 1, j - 1), dp.X(i - 1, j - 1), dp.Y(i - 1, j - 1)};
      const int need = dp.M(i, j) - sub_score(a[i - 1], b[j - 1], p);
      // Diagonal > up > left preference.
      state = (vals[0] == need) ? 0 : (vals[1] == need ? 1 : 2);
      --i, --j;
    } else if (state == 1) {
      col_a.push_back(a[i - 1]);
      col_b.push_back('-');
      if (i == 1) {
        --i;
        break;
      }
      const int need = dp.X(i, j);
      if (dp.M(i - 1, j) - p.gap_open == need) {
        state = 0;
      } else if (dp.X(i - 1, j) - p.gap_extend == need) {
        state = 1;
      } else {
        state = 2;
      }
      --i;
    } else {
      col_a.push_back('-');
      col_b.push_back(b[j - 1]);
      if (j == 1) {
        --j;
        break;
      }
      const int need = dp.Y(i, j);
      if (dp.M(i, j - 1) - p.gap_open == need) {
        state = 0;
      } else if (dp.X(i, j - 1) - p.gap_open == need) {
        state = 1;
      } else {
        state = 2;
      }
      --j;
    }
  }
  std::reverse(col_a.begin(), col_a.end());
  std::reverse(col_b.begin(), col_b.end());

  // Compact cigar over the core columns.
  if (!col_a.empty()) {
    auto op_of = [](char ca, char cb) { return cb == '-' ? 'D' : (ca == '-' ? 'I' : 'M'); };
    char cur = op_of(col_a[0], col_b[0]);
    int run = 0;
    for (size_t c = 0; c < col_a.size(); ++c) {
      char op = op_of(col_a[c], col_b[c]);
      if (op == cur) {
        ++run;
      } else {
        out.cigar += std::to_string(run) + cur;
        cur = op;
        run = 1;
      }
    }
    out.cigar += std::to_string(run) + cur;
  }

  // Free end gaps: pad out the unaligned prefixes and suffixes.
  const int lead_a = i, lead_b = j;
  std::string row_a, row_b;
  row_a.append(a.str(), 0, lead_a);
  row_a.append(lead_b, '-');
  row_b.append(lead_a, '-');
  row_b.append(b.str(), 0, lead_b);
  row_a += col_a;
  row_b += col_b;
  const int tail_a = static_cast<int>(a.size()) - end.i;
  const int tail_b = static_cast<int>(b.size()) - end.j;
  row_a.append(a.str(), end.i, tail_a);
  row_a.append(tail_b, '-');
  row_b.append(tail_a, '-');
  row_b.append(b.str(), end.j, tail_b);
  out.aligned_a = std::move(row_a);
  out.aligned_b = std::move(row_b);
  return out;
}

int annealing_score(const DnaSeq& s1, const DnaSeq& s2, const AlignParams& p) {
  return semi_global_score(s1, reverse_complement(s2), p);
}

namespace {

// Move-context states for the brute-force recursion.
enum BState : int { kStart = 0, kLeadU, kLeadL, kAfterD, kIntU, kIntL };

struct Brute {
  const DnaSeq& a;
  const DnaSeq& b;
  const AlignParams& p;
  int n, m;
  std::vector<int> memo;  // (i * (m+1) + j) * 6 + state
  std::vector<bool> seen;

  int best(int i, int j, int st) {
    if (i == n || j == m) return 0;  // forced single-type run to the end: free
    const size_t key = (static_cast<size_t>(i) * (m + 1) + j) * 6 + st;
    if (seen[key]) return memo[key];
    int r = sub_score(a[i], b[j], p) + best(i + 1, j + 1, kAfterD);
    const int up_cost = (st == kStart || st == kLeadU) ? 0
                        : (st == kIntU ? -p.gap_extend : -p.gap_open);
    const int up_state = (st == kStart || st == kLeadU) ? kLeadU : kIntU;
    r = std::max(r, up_cost + best(i + 1, j, up_state));
    const int left_cost = (st == kStart || st == kLeadL) ? 0
                          : (st == kIntL ? -p.gap_extend : -p.gap_open);
    const int left_state = (st == kStart || st == kLeadL) ? kLeadL : kIntL;
    r = std::max(r, left_cost + best(i, j + 1, left_state));
    seen[key] = true;
    memo[key] = r;
    return r;
  }
};

}  // namespace

int brute_force_score(const DnaSeq& a, const DnaSeq& b, const AlignParams& p) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptySequence, "alignment needs non-empty sequences");
  }
  if (a.size() * b.size() > 200) {
    throw Error(ErrorCode::TooLarge, "brute-force oracle limited to len(a)*len(b) <= 200");
  }
  Brute brute{a, b, p, static_cast<int>(a.size()), static_cast<int>(b.size()), {}, {}};
  const size_t cells = static_cast<size_t>(brute.n + 1) * (brute.m + 1) * 6;
  brute.memo.assign(cells, 0);
  brute.seen.assign(cells, false);
  return brute.best(0, 0, kStart);
}

int score_alignment_rows(const std::string& row_a, const std::string& row_b,
                         const AlignParams& p) {
  if (row_a.size() != row_b.size()) {
    throw Error(ErrorCode::LengthMismatch, "alignment rows differ in length");
  }
  const int n = static_cast<int>(row_a.size());
  // A free end gap is a single-type run: one maximal '-' run in one row per
  // end. A gap block on the *other* row adjacent to it is internal.
  int lead = 0;
  if (n > 0 && (row_a[0] == '-' || row_b[0] == '-')) {
    const std::string& gapped = (row_a[0] == '-') ? row_a : row_b;
    while (lead < n && gapped[lead] == '-') ++lead;
  }
  int tail = n;
  if (tail > lead && (row_a[n - 1] == '-' || row_b[n - 1] == '-')) {
    const std::string& gapped = (row_a[n - 1] == '-') ? row_a : row_b;
    while (tail > lead && gapped[tail - 1] == '-') --tail;
  }
  int score = 0;
  int gap_run = 0;  // length of the current same-row gap run
  for (int c = lead; c < tail; ++c) {
    const bool gap_a = row_a[c] == '-';
    const bool gap_b = row_b[c] == '-';
    if (gap_a || gap_b) {
      const bool continues =
          gap_run > 0 && (gap_a == (row_a[c - 1] == '-')) && (gap_b == (row_b[c - 1] == '-'));
      gap_run = continues ? gap_run + 1 : 1;
      score -= (gap_run == 1) ? p.gap_open : p.gap_extend;
    } else {
      gap_run = 0;
      score += sub_score(row_a[c], row_b[c], p);
    }
  }
  return score;
}

}  // namespace hybseq
