#pragma once

#include <string>

#include "hybseq/seq.hpp"

namespace hybseq {

/// Scoring convention: +5 match, -4 mismatch, an internal gap of length L
/// costs gap_open + (L-1) * gap_extend, and gaps at both ends of both
/// sequences are free.
struct AlignParams {
  int match = 5;
  int mismatch = -4;
  int gap_open = 5;
  int gap_extend = 2;

  void validate() const;
};

struct AlignResult {
  int score = 0;
  std::string cigar;      // aligned core only: counts of M (diagonal), D (gap
                          // in b, consumes a), I (gap in a, consumes b)
  std::string aligned_a;  // full rows including free end gaps, '-' padded
  std::string aligned_b;
};

/// Best semi-global alignment score (Gotoh affine DP, free end gaps).
int semi_global_score(const DnaSeq& a, const DnaSeq& b, const AlignParams& p = {});

/// Score plus a deterministic traceback; ties broken diagonal > up > left.
AlignResult semi_global_trace(const DnaSeq& a, const DnaSeq& b, const AlignParams& p = {});

/// Hybridisation proxy: semi_global_score(s1, reverse_complement(s2)).
int annealing_score(const DnaSeq& s1, const DnaSeq& s2, const AlignParams& p = {});

/// Test oracle. Memoized move-by-move recursion over explicit gap-run
/// context, structurally independent of the Gotoh matrices. Requires
/// len(a) * len(b) <= 200 (TooLarge otherwise).
int brute_force_score(const DnaSeq& a, const DnaSeq& b, const AlignParams& p = {});

/// Re-scores a pair of '-'-padded alignment rows under the same convention,
/// with the leading/trailing end-gap blocks excluded. Used to validate traces.
int score_alignment_rows(const std::string& row_a, const std::string& row_b,
                         const AlignParams& p = {});

}  // namespace hybseq
