#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hybseq/dataset.hpp"
#include "hybseq/thermo.hpp"

namespace hybseq {

/// The 9 per-pair features, fixed order:
///   f0       annealing alignment score
///   f1, f2   GC fraction of s1, s2
///   f3, f4   single-strand structure score of s1, s2 (kcal/mol)
///   f5, f6   equilibrium single-strand concentration of s1, s2 alone (uM)
///   f7, f8   equilibrium homodimer concentration of s1, s2 alone (uM)
struct FeatureVector {
  std::array<double, 9> v{};

  double operator[](size_t i) const { return v[i]; }
};

inline constexpr int kFeatureCount = 9;

enum class FeatureGroup : uint8_t { Aln, GC, SC, PC, SMFE };

/// Ablation mask over feature groups; columns come out in canonical
/// (feature-index) order.
struct FeatureMask {
  bool aln = false, gc = false, sc = false, pc = false, smfe = false;

  static FeatureMask all();
  static FeatureMask of(std::initializer_list<FeatureGroup> groups);
  /// Comma-separated names: "Aln,GC,SC,PC,SMFE" (case-insensitive).
  static FeatureMask parse(const std::string& text);

  bool empty() const { return !(aln || gc || sc || pc || smfe); }
  std::vector<int> columns() const;
  std::string str() const;
};

/// Deterministic per-pair extraction. The single-sequence tube (f5..f8) is
/// solved with a0 = 1 uM over species {A, AA} at `temp_c` (default 37 C, the
/// condition of the motivating single-strand analyses).
FeatureVector extract(const DnaSeq& s1, const DnaSeq& s2, const NnParamTable& nn,
                      const AlignParams& p = {}, double temp_c = 37.0);

std::vector<double> apply_mask(const FeatureVector& v, const FeatureMask& m);

/// Z-scoring with training statistics; zero-variance columns keep std 1.
struct Standardizer {
  std::vector<double> mean, std;

  static Standardizer fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> transform(const std::vector<double>& x) const;
  void transform_in_place(std::vector<std::vector<double>>& rows) const;
};

/// Feature CSV: s1,s2,f0..f8,y57,label (y column named from the reference
/// temperature).
struct FeatureTable {
  std::vector<YieldRecord> records;  // s1, s2, label and full yields retained
  std::vector<FeatureVector> features;
  std::vector<double> ref_yields;
  double ref_temp = 57.0;
};

FeatureTable extract_table(const Dataset& ds, const NnParamTable& nn,
                           const AlignParams& p = {}, double temp_c = 37.0);

void write_features_csv(const FeatureTable& table, std::ostream& out);
void write_features_csv_file(const FeatureTable& table, const std::string& path);
FeatureTable read_features_csv(std::istream& in);
FeatureTable read_features_csv_file(const std::string& path);

}  // namespace hybseq
