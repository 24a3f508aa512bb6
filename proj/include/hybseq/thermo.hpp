#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hybseq/align.hpp"
#include "hybseq/seq.hpp"

namespace hybseq {

/// Gas constant, kcal/(mol K).
inline constexpr double kGasConstant = 1.9872e-3;
inline constexpr double kLoopRefTempK = 310.15;

inline double celsius_to_kelvin(double temp_c) { return temp_c + 273.15; }

struct StackParams {
  double dh = 0;  // kcal/mol
  double ds = 0;  // cal/(mol K)

  bool operator==(const StackParams&) const = default;
};

/// Nearest-neighbor duplex parameters: the 10 unique Watson-Crick dinucleotide
/// steps plus initiation and per-AT-terminal corrections, and the internal
/// loop model dG(310.15 K) = loop_base + loop_per_nt * L (pure entropy).
class NnParamTable {
 public:
  /// The bundled copy, embedded at build time.
  static const NnParamTable& defaults();
  /// Parses the key-value format; verifies the checksum line when present.
  static NnParamTable parse_text(const std::string& text);
  static NnParamTable load_file(const std::string& path);

  std::string serialize() const;  // canonical form with trailing checksum line
  uint64_t checksum() const;

  /// Stack step for a duplex dinucleotide given by its top-strand bases;
  /// the equivalent reverse-complement step maps to the same entry.
  const StackParams& stack(char first, char second) const;

  StackParams init{0.0, 0.0};
  StackParams terminal_at{0.0, 0.0};
  double loop_base = 3.5;
  double loop_per_nt = 0.5;

  bool operator==(const NnParamTable&) const = default;

 private:
  std::array<StackParams, 16> stacks_{};  // indexed 4*first+second, rc-symmetrized
};

struct DuplexEnergy {
  double dh = 0;       // kcal/mol
  double ds = 0;       // cal/(mol K)
  bool bound = false;  // false: no Watson-Crick pairing found, K := 0

  double dg(double temp_c) const { return dh - celsius_to_kelvin(temp_c) * ds / 1000.0; }

  /// Association constant in 1/M; 0 when unbound.
  double assoc_const(double temp_c) const;
};

/// Two-state duplex energy for the pair (s1, s2). The pairing geometry comes
/// from semi_global_trace(s1, reverse_complement(s2)): each maximal run of
/// matched columns contributes its stack terms, each internal run of L
/// unmatched columns a loop penalty, plus initiation and AT-terminal terms.
DuplexEnergy duplex_energy(const DnaSeq& s1, const DnaSeq& s2,
                           const AlignParams& p, const NnParamTable& nn);

/// Nussinov-style maximum WC base pairing with minimum hairpin loop 3,
/// scored -1.0 kcal/mol per pair (0.0 when nothing can pair).
/// Requires len >= 8 (TooShort).
double single_structure_score(const DnaSeq& s);

/// Two-strand test tube: species {A, B, AA, BB, AB}.
struct TubeSpec {
  double a0 = 1e-6;  // mol/L
  double b0 = 1e-6;
  double temp_c = 57.0;
  double k_aa = 0.0;  // association constants, 1/M
  double k_bb = 0.0;
  double k_ab = 0.0;
};

struct TubeState {
  double a = 0, b = 0;              // free monomers, mol/L
  double c_aa = 0, c_bb = 0, c_ab = 0;
  double yield = 0;                 // c_ab / min(a0, b0)
};

/// Solves a + 2 K_AA a^2 + K_AB a b = a0 (and symmetrically for b) with a
/// damped Newton iteration on log-concentrations, falling back to nested
/// bisection. Residuals converge below min(1e-12, 1e-10 * strand total).
TubeState equilibrate(const TubeSpec& spec);

/// Duplex yield at 1 uM strand concentrations: association constants from
/// duplex_energy for AB, AA and BB, then equilibrate. Temperature in [0, 100].
double pair_yield(const DnaSeq& s1, const DnaSeq& s2, double temp_c,
                  const NnParamTable& nn, const AlignParams& p = {});

std::vector<double> yield_profile(const DnaSeq& s1, const DnaSeq& s2,
                                  const std::vector<double>& temps,
                                  const NnParamTable& nn, const AlignParams& p = {});

/// pair_yield with memoized homodimer energies, for batch generation where
/// the same sequences recur across pairs. Fill the cache single-threaded (or
/// prewarm) before concurrent use.
class YieldOracle {
 public:
  explicit YieldOracle(const NnParamTable& nn, AlignParams p = {})
      : nn_(nn), params_(p) {}

  std::vector<double> profile(const DnaSeq& s1, const DnaSeq& s2,
                              const std::vector<double>& temps);
  double yield_at(const DnaSeq& s1, const DnaSeq& s2, double temp_c);
  const DuplexEnergy& homodimer(const DnaSeq& s);

  const NnParamTable& nn() const { return nn_; }
  const AlignParams& params() const { return params_; }

 private:
  const NnParamTable& nn_;
  AlignParams params_;
  std::map<std::string, DuplexEnergy> cache_;  // node-based: stable references
};

/// Pairwise distances between temperature columns of a yields matrix
/// (rows = records, columns = temps): mean absolute and mean squared error.
struct TempSimilarity {
  std::vector<double> temps;
  std::vector<double> mae;  // row-major temps x temps
  std::vector<double> mse;

  double mae_at(size_t i, size_t j) const { return mae[i * temps.size() + j]; }
  double mse_at(size_t i, size_t j) const { return mse[i * temps.size() + j]; }
};

TempSimilarity temp_similarity(const std::vector<std::vector<double>>& yields,
                               const std::vector<double>& temps);

}  // namespace hybseq
