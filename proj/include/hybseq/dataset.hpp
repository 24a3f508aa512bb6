#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hybseq/seq.hpp"

namespace hybseq {

enum class Label : uint8_t { Low, High };

const char* label_name(Label label);

/// High iff yield >= threshold (the 0.2 boundary itself is High).
Label label_yield(double yield, double threshold = 0.2);

struct YieldRecord {
  DnaSeq s1, s2;
  std::vector<double> yields;  // aligned with the dataset temperature list
  Label label = Label::Low;    // at the reference temperature

  bool operator==(const YieldRecord&) const = default;
};

inline const std::vector<double>& canonical_temps() {
  static const std::vector<double> temps = {37, 42, 47, 52, 57, 62};
  return temps;
}

struct Dataset {
  std::vector<double> temps = canonical_temps();
  double ref_temp = 57.0;
  std::vector<YieldRecord> records;

  size_t ref_index() const;
  double ref_yield(const YieldRecord& rec) const { return rec.yields[ref_index()]; }
};

struct DatasetConfig {
  int n_roots = 500;            // families added per round
  int minor_root_count = 1;     // minor mutants of the root
  int minor_rc_count = 3;       // minor mutants of the reverse complement
  int severe_root_count = 0;
  int severe_rc_count = 1;
  int minor_count_min = 1, minor_count_max = 2;
  int severe_count_min = 5, severe_count_max = 8;
  bool rc_mutation = true;      // mutate the reverse complement too
  bool allow_self_pairs = false;
  size_t target_size = 50000;
  int max_rounds = 8;
  uint64_t seed = 0;
  std::vector<double> temps = canonical_temps();
  double ref_temp = 57.0;
  double label_threshold = 0.2;
  int len_min = kLibMinLen, len_max = kLibMaxLen;
  double variety_min_fraction = 0.10;  // per region: <0.1, [0.1,0.9), >=0.9

  void validate() const;
};

/// Per-pair oracle: yields at cfg.temps, in order.
using PairOracle =
    std::function<std::vector<double>(const DnaSeq&, const DnaSeq&)>;

struct GenerateResult {
  Dataset dataset;
  std::vector<std::string> warnings;
  size_t families = 0;
};

/// Roots -> mutation families (including reverse-complement-derived mutants)
/// -> pool dedup -> all within-family pairings -> oracle yields -> labels.
/// Rounds repeat until both the target size and the variety floors are met
/// (or max_rounds is exhausted, with a warning). Yields are quantized to six
/// decimals before labelling so that CSV round-trips are exact.
GenerateResult generate(const DatasetConfig& cfg, const PairOracle& oracle);

struct SplitIndices {
  std::vector<size_t> train, val, test;
};

/// Proportional allocation inside each of `bins` equal-width bins on the
/// reference-temperature yield (largest-remainder rounding). Exact disjoint
/// partition; deterministic given seed. Requires >= 10 records (TooFew).
SplitIndices stratified_split(const Dataset& ds, double train_frac = 0.8,
                              double val_frac = 0.1, double test_frac = 0.1,
                              int bins = 10, uint64_t seed = 0);

Dataset subset(const Dataset& ds, const std::vector<size_t>& indices);

/// CSV: header s1,s2,y37,y42,y47,y52,y57,y62,label, yields with 6 decimals.
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv_file(const Dataset& ds, const std::string& path);
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);

}  // namespace hybseq
