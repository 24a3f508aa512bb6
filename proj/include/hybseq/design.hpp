#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hybseq/seq.hpp"

namespace hybseq {

/// Longest common contiguous substring length (exact DP).
int brute_lcs(const DnaSeq& a, const DnaSeq& b);

/// Exact k-mer index: every k-mer of every indexed sequence, as a
/// counting-sort CSR over the 4^k integer-encoded k-mer space.
class KmerIndex {
 public:
  static KmerIndex build(const std::vector<DnaSeq>& seqs, int k);

  int k() const { return k_; }
  size_t posting_count() const { return postings_.size(); }

  /// Sequence ids containing the given encoded k-mer.
  std::pair<const uint32_t*, const uint32_t*> lookup(uint32_t code) const;

 private:
  int k_ = 0;
  std::vector<uint32_t> offsets_;   // 4^k + 1
  std::vector<uint32_t> postings_;  // sequence ids
};

uint32_t encode_kmer(const char* bases, int k);

struct CandidateSet {
  std::vector<std::pair<uint32_t, uint32_t>> pairs;  // unordered, i < j
  uint64_t raw_hits = 0;           // (query, partner) incidences before dedup
  uint64_t self_removed = 0;       // i == j incidences dropped
  uint64_t symmetric_removed = 0;  // j > i duplicates dropped
};

/// Pairs (i, j) with brute_lcs(s_i, reverse_complement(s_j)) >= k, found by
/// probing the index of all sequences with the k-mers of each reverse
/// complement. Exact: a common substring of length >= k exists iff one of
/// length exactly k does.
CandidateSet candidate_pairs(const std::vector<DnaSeq>& seqs, int k = 5);

/// Streaming variant: invokes emit(i, j) per unordered candidate pair without
/// materializing the set; returns the same counters. Pass a null emit to
/// count only (the 100K-scale scan).
CandidateSet scan_candidates(const std::vector<DnaSeq>& seqs, int k,
                             const std::function<void(uint32_t, uint32_t)>& emit);

struct Conflict {
  uint32_t id1 = 0, id2 = 0;
  double yield = 0;

  bool operator==(const Conflict&) const = default;
};

using PairPredictor = std::function<double(const DnaSeq&, const DnaSeq&)>;

/// Runs the predictor over candidate pairs as they stream out of the k-mer
/// scan and keeps those at or above the threshold, sorted by descending
/// yield (ties by ids).
std::vector<Conflict> conflict_scan(const std::vector<DnaSeq>& seqs, int k,
                                    const PairPredictor& predictor,
                                    double threshold = 0.2);

/// Same, over an already materialized candidate set.
std::vector<Conflict> conflict_scan(const std::vector<DnaSeq>& seqs,
                                    const CandidateSet& candidates,
                                    const PairPredictor& predictor,
                                    double threshold = 0.2);

/// Repeatedly removes the sequence with the most conflicts (ties: lowest id)
/// until none remain; returns the surviving ids, ascending.
std::vector<uint32_t> greedy_prune(size_t n_seqs, const std::vector<Conflict>& conflicts);

}  // namespace hybseq
