#include "hybseq/design.hpp"

#include <algorithm>

namespace hybseq {

int brute_lcs(const DnaSeq& a, const DnaSeq& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  int best = 0;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

uint32_t encode_kmer(const char* bases, int k) {
  uint32_t code = 0;
  for (int i = 0; i < k; ++i) {
    code = (code << 2) | static_cast<uint32_t>(base_index(bases[i]));
  }
  return code;
}

KmerIndex KmerIndex::build(const std::vector<DnaSeq>& seqs, int k) {
  if (k < 4 || k > 12) {
    throw Error(ErrorCode::KTooLarge, "k must be in [4, 12], got " + std::to_string(k));
  }
  for (const auto& s : seqs) {
    if (static_cast<int>(s.size()) < k) {
      throw Error(ErrorCode::KTooLarge,
                  "sequence shorter than k: " + s.str());
    }
  }
  KmerIndex index;
  index.k_ = k;
  const size_t buckets = size_t{1} << (2 * k);
  index.offsets_.assign(buckets + 1, 0);
  for (const auto& s : seqs) {
    const char* base = s.str().data();
    for (size_t pos = 0; pos + k <= s.size(); ++pos) {
      ++index.offsets_[encode_kmer(base + pos, k) + 1];
    }
  }
  for (size_t b = 0; b < buckets; ++b) index.offsets_[b + 1] += index.offsets_[b];
  index.postings_.resize(index.offsets_.back());
  std::vector<uint32_t> cursor(index.offsets_.begin(), index.offsets_.end() - 1);
  for (uint32_t id = 0; id < seqs.size(); ++id) {
    const DnaSeq& s = seqs[id];
    const char* base = s.str().data();
    for (size_t pos = 0; pos + k <= s.size(); ++pos) {
      index.postings_[cursor[encode_kmer(base + pos, k)]++] = id;
    }
  }
  return index;
}

std::pair<const uint32_t*, const uint32_t*> KmerIndex::lookup(uint32_t code) const {
  return {postings_.data() + offsets_[code], postings_.data() + offsets_[code + 1]};
}

CandidateSet scan_candidates(const std::vector<DnaSeq>& seqs, int k,
                             const std::function<void(uint32_t, uint32_t)>& emit) {
  KmerIndex index = KmerIndex::build(seqs, k);
  CandidateSet out;
  // Partner dedup per query via a stamp array: O(1) per posting, no per-query
  // allocation.
  std::vector<uint32_t> stamp(seqs.size(), UINT32_MAX);
  for (uint32_t j = 0; j < seqs.size(); ++j) {
    const DnaSeq rc = reverse_complement(seqs[j]);
    const char* base = rc.str().data();
    for (size_t pos = 0; pos + k <= rc.size(); ++pos) {
      auto [it, end] = index.lookup(encode_kmer(base + pos, k));
      for (; it != end; ++it) {
        const uint32_t i = *it;
        if (stamp[i] == j) continue;
        stamp[i] = j;
        ++out.raw_hits;
        if (i == j) {
          ++out.self_removed;
        } else if (i > j) {
          // The (j, i) incidence reappears when probing query i.
          ++out.symmetric_removed;
        } else if (emit) {
          emit(i, j);
        }
      }
    }
  }
  return out;
}

CandidateSet candidate_pairs(const std::vector<DnaSeq>& seqs, int k) {
  CandidateSet out;
  CandidateSet counters = scan_candidates(
      seqs, k, [&](uint32_t i, uint32_t j) { out.pairs.emplace_back(i, j); });
  out.raw_hits = counters.raw_hits;
  out.self_removed = counters.self_removed;
  out.symmetric_removed = counters.symmetric_removed;
  return out;
}

namespace {

void sort_conflicts(std::vector<Conflict>& conflicts) {
  std::sort(conflicts.begin(), conflicts.end(), [](const Conflict& a, const Conflict& b) {
    if (a.yield != b.yield) return a.yield > b.yield;
    if (a.id1 != b.id1) return a.id1 < b.id1;
    return a.id2 < b.id2;
  });
}

}  // namespace

std::vector<Conflict> conflict_scan(const std::vector<DnaSeq>& seqs, int k,
                                    const PairPredictor& predictor, double threshold) {
  std::vector<Conflict> conflicts;
  scan_candidates(seqs, k, [&](uint32_t i, uint32_t j) {
    const double y = predictor(seqs[i], seqs[j]);
    if (y >= threshold) conflicts.push_back({i, j, y});
  });
  sort_conflicts(conflicts);
  return conflicts;
}

std::vector<Conflict> conflict_scan(const std::vector<DnaSeq>& seqs,
                                    const CandidateSet& candidates,
                                    const PairPredictor& predictor, double threshold) {
  std::vector<Conflict> conflicts;
  for (const auto& [i, j] : candidates.pairs) {
    const double y = predictor(seqs[i], seqs[j]);
    if (y >= threshold) conflicts.push_back({i, j, y});
  }
  sort_conflicts(conflicts);
  return conflicts;
}

std::vector<uint32_t> greedy_prune(size_t n_seqs, const std::vector<Conflict>& conflicts) {
  std::vector<std::vector<uint32_t>> adjacency(n_seqs);
  std::vector<long> degree(n_seqs, 0);
  for (const auto& c : conflicts) {
    adjacency[c.id1].push_back(c.id2);
    adjacency[c.id2].push_back(c.id1);
    ++degree[c.id1];
    ++degree[c.id2];
  }
  std::vector<char> removed(n_seqs, 0);
  for (;;) {
    long best = 0;
    size_t pick = n_seqs;
    for (size_t i = 0; i < n_seqs; ++i) {
      if (!removed[i] && degree[i] > best) {
        best = degree[i];
        pick = i;
      }
    }
    if (pick == n_seqs) break;  // no conflicts left
    removed[pick] = 1;
    for (uint32_t partner : adjacency[pick]) {
      if (!removed[partner]) --degree[partner];
    }
    degree[pick] = 0;
  }
  std::vector<uint32_t> survivors;
  for (size_t i = 0; i < n_seqs; ++i) {
    if (!removed[i]) survivors.push_back(static_cast<uint32_t>(i));
  }
  return survivors;
}

}  // namespace hybseq
