#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hybseq/error.hpp"
#include "hybseq/rng.hpp"

namespace hybseq {

inline constexpr int kLibMinLen = 18;  // primer-library length window
inline constexpr int kLibMaxLen = 26;
inline constexpr int kMaxSeqLen = 64;  // hard cap accepted anywhere

/// Validated uppercase ACGT sequence.
class DnaSeq {
 public:
  DnaSeq() = default;

  /// Case-normalizes and validates. Throws EmptySequence, InvalidBase
  /// (with the offending position) or TooLong (> 64 nt).
  static DnaSeq parse(const std::string& text);

  const std::string& str() const { return bases_; }
  size_t size() const { return bases_.size(); }
  bool empty() const { return bases_.empty(); }
  char operator[](size_t i) const { return bases_[i]; }

  auto begin() const { return bases_.begin(); }
  auto end() const { return bases_.end(); }

  bool operator==(const DnaSeq&) const = default;
  auto operator<=>(const DnaSeq&) const = default;

 private:
  friend DnaSeq unchecked_seq(std::string bases);
  explicit DnaSeq(std::string bases) : bases_(std::move(bases)) {}

  std::string bases_;
};

/// Internal fast path for callers that guarantee validity (mutation,
/// random generation, reverse complement).
DnaSeq unchecked_seq(std::string bases);

/// A=0, C=1, G=2, T=3; -1 for anything else.
int base_index(char base);
char index_base(int index);
char complement(char base);

DnaSeq reverse_complement(const DnaSeq& s);

/// (#G + #C) / length.
double gc_content(const DnaSeq& s);

/// Uniform over all sequences of the given length with no homopolymer run of
/// length >= 3, via completion-count weighted sampling. Lengths are restricted
/// to the 18-26 library window (BadLength otherwise).
DnaSeq random_seq(int len, Rng& rng);

enum class MutationKind { Minor, Severe };
enum class EditOp : uint8_t { Insert, Delete, Substitute };

struct MutationProfile {
  MutationKind kind = MutationKind::Minor;
  std::vector<EditOp> ops;
  int count_min = 1;
  int count_max = 2;

  static MutationProfile minor(EditOp op, int count_min = 1, int count_max = 2);
  static MutationProfile severe(int count_min = 5, int count_max = 8);

  /// Enforces the canonical shape: Minor carries exactly one op kind with
  /// counts inside [1,2]; Severe carries all three kinds with count_min >= 5.
  void validate() const;
};

/// Applies a sampled edit script. Ops that would push the length outside
/// [18, 26] are re-drawn up to 16 times, then skipped. Substitutions always
/// change the base; insertion bases and all positions are uniform.
DnaSeq mutate(const DnaSeq& s, const MutationProfile& profile, Rng& rng);

/// Pair image, shape [2][4][n_max]: channel 0 = first strand, channel 1 =
/// second strand; rows A,C,G,T; shorter strands zero-padded on the right.
struct OneHotPair {
  int n_max = kLibMaxLen;
  std::vector<double> grid;  // 2 * 4 * n_max, row-major [channel][row][col]

  double at(int channel, int row, int col) const {
    return grid[(static_cast<size_t>(channel) * 4 + row) * n_max + col];
  }
};

OneHotPair one_hot_pair(const DnaSeq& s1, const DnaSeq& s2, int n_max = kLibMaxLen);

/// Byte-packed variant used where many pairs are held in memory at once
/// (benchmarks, training set staging). Layout matches OneHotPair.
void one_hot_pair_bytes(const DnaSeq& s1, const DnaSeq& s2, int n_max, uint8_t* out);

struct FastaRecord {
  std::string id;
  DnaSeq seq;
};

std::vector<FastaRecord> read_fasta(std::istream& in);
std::vector<FastaRecord> read_fasta_file(const std::string& path);
void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records);
void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records);

}  // namespace hybseq
