#include "hybseq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace hybseq {

namespace {

constexpr double kLowRegionEdge = 0.1;
constexpr double kHighRegionEdge = 0.9;

double quantize6(double y) { return std::round(y * 1e6) / 1e6; }

}  // namespace

const char* label_name(Label label) {
  return label == Label::High ? "High" : "Low";
}

Label label_yield(double yield, double threshold) {
  if (yield < 0.0 || yield > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "yield outside [0, 1]");
  }
  return yield >= threshold ? Label::High : Label::Low;
}

size_t Dataset::ref_index() const {
  for (size_t i = 0; i < temps.size(); ++i) {
    if (temps[i] == ref_temp) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "reference temperature not in temps");
}

void DatasetConfig::validate() const {
  if (n_roots < 1 || target_size < 1 || max_rounds < 1) {
    throw Error(ErrorCode::InvalidArgument, "n_roots, target_size, max_rounds must be >= 1");
  }
  if (minor_root_count < 0 || minor_rc_count < 0 || severe_root_count < 0 ||
      severe_rc_count < 0) {
    throw Error(ErrorCode::InvalidArgument, "mutant counts must be >= 0");
  }
  if (std::find(temps.begin(), temps.end(), ref_temp) == temps.end()) {
    throw Error(ErrorCode::InvalidArgument, "reference temperature must be in temps");
  }
  if (len_min < kLibMinLen || len_max > kLibMaxLen || len_min > len_max) {
    throw Error(ErrorCode::InvalidArgument, "length window must sit inside [18, 26]");
  }
  // Canonical profile shapes must be constructible.
  MutationProfile::minor(EditOp::Substitute, minor_count_min, minor_count_max).validate();
  MutationProfile::severe(severe_count_min, severe_count_max).validate();
}

namespace {

struct RegionCounts {
  size_t low = 0, mid = 0, high = 0;

  void add(double y) {
    if (y < kLowRegionEdge) {
      ++low;
    } else if (y < kHighRegionEdge) {
      ++mid;
    } else {
      ++high;
    }
  }

  bool variety_ok(double min_fraction, size_t total) const {
    if (total == 0) return false;
    const double floor_count = min_fraction * static_cast<double>(total);
    return low >= floor_count && mid >= floor_count && high >= floor_count;
  }
};

EditOp sample_op(Rng& rng) {
  static constexpr EditOp kOps[3] = {EditOp::Insert, EditOp::Delete, EditOp::Substitute};
  return kOps[rng.below(3)];
}

}  // namespace

GenerateResult generate(const DatasetConfig& cfg, const PairOracle& oracle) {
  cfg.validate();
  GenerateResult result;
  result.dataset.temps = cfg.temps;
  result.dataset.ref_temp = cfg.ref_temp;
  const size_t ref_idx = result.dataset.ref_index();

  Rng rng(cfg.seed);
  std::unordered_set<std::string> pool;
  RegionCounts regions;
  auto& records = result.dataset.records;

  const MutationProfile severe =
      MutationProfile::severe(cfg.severe_count_min, cfg.severe_count_max);

  bool done = false;
  for (int round = 0; round < cfg.max_rounds && !done; ++round) {
    for (int root_i = 0; root_i < cfg.n_roots; ++root_i) {
      const int len = rng.range(cfg.len_min, cfg.len_max);
      const DnaSeq root = random_seq(len, rng);
      const DnaSeq root_rc = reverse_complement(root);

      std::vector<DnaSeq> family;
      auto admit = [&](const DnaSeq& s) {
        if (pool.insert(s.str()).second) family.push_back(s);
      };
      admit(root);
      for (int i = 0; i < cfg.minor_root_count; ++i) {
        admit(mutate(root, MutationProfile::minor(sample_op(rng), cfg.minor_count_min,
                                                  cfg.minor_count_max),
                     rng));
      }
      for (int i = 0; i < cfg.severe_root_count; ++i) {
        admit(mutate(root, severe, rng));
      }
      if (cfg.rc_mutation) {
        for (int i = 0; i < cfg.minor_rc_count; ++i) {
          admit(mutate(root_rc, MutationProfile::minor(sample_op(rng), cfg.minor_count_min,
                                                       cfg.minor_count_max),
                       rng));
        }
        for (int i = 0; i < cfg.severe_rc_count; ++i) {
          admit(mutate(root_rc, severe, rng));
        }
      }
      ++result.families;

      for (size_t i = 0; i < family.size(); ++i) {
        for (size_t j = cfg.allow_self_pairs ? i : i + 1; j < family.size(); ++j) {
          YieldRecord rec;
          rec.s1 = family[i];
          rec.s2 = family[j];
          std::vector<double> yields;
          try {
            yields = oracle(rec.s1, rec.s2);
          } catch (const Error& e) {
            throw Error(ErrorCode::OracleFailure,
                        std::string("pair (") + rec.s1.str() + ", " + rec.s2.str() +
                            "): " + e.what());
          }
          if (yields.size() != cfg.temps.size()) {
            throw Error(ErrorCode::OracleFailure,
                        "oracle returned wrong yield count for pair (" + rec.s1.str() +
                            ", " + rec.s2.str() + ")");
          }
          rec.yields.reserve(yields.size());
          for (double y : yields) rec.yields.push_back(quantize6(y));
          rec.label = label_yield(rec.yields[ref_idx], cfg.label_threshold);
          regions.add(rec.yields[ref_idx]);
          records.push_back(std::move(rec));
        }
      }
      if (records.size() >= cfg.target_size &&
          regions.variety_ok(cfg.variety_min_fraction, records.size())) {
        done = true;
        break;
      }
    }
  }

  if (records.empty()) {
    result.warnings.push_back(
        "no pairs generated: families have fewer than two members "
        "(enable mutations or self-pairs)");
  } else if (!done) {
    std::ostringstream w;
    w << "stopped after " << cfg.max_rounds << " rounds with " << records.size()
      << " pairs (target " << cfg.target_size << "); region fractions low/mid/high = "
      << static_cast<double>(regions.low) / records.size() << '/'
      << static_cast<double>(regions.mid) / records.size() << '/'
      << static_cast<double>(regions.high) / records.size();
    result.warnings.push_back(w.str());
  }
  return result;
}

SplitIndices stratified_split(const Dataset& ds, double train_frac, double val_frac,
                              double test_frac, int bins, uint64_t seed) {
  if (ds.records.size() < 10) {
    throw Error(ErrorCode::TooFew, "stratified split needs at least 10 records");
  }
  if (bins < 1) {
    throw Error(ErrorCode::InvalidArgument, "bins must be >= 1");
  }
  const double frac_sum = train_frac + val_frac + test_frac;
  if (std::abs(frac_sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must sum to 1");
  }

  std::vector<std::vector<size_t>> by_bin(bins);
  for (size_t i = 0; i < ds.records.size(); ++i) {
    const double y = ds.ref_yield(ds.records[i]);
    const int bin = std::min(bins - 1, static_cast<int>(y * bins));
    by_bin[bin].push_back(i);
  }

  Rng rng(seed);
  SplitIndices out;
  const double fracs[3] = {train_frac, val_frac, test_frac};
  std::vector<size_t>* dests[3] = {&out.train, &out.val, &out.test};
  for (auto& bin : by_bin) {
    if (bin.empty()) continue;
    rng.shuffle(bin);
    const size_t n = bin.size();
    size_t counts[3];
    double remainders[3];
    size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
      const double exact = fracs[k] * static_cast<double>(n);
      counts[k] = static_cast<size_t>(std::floor(exact));
      remainders[k] = exact - static_cast<double>(counts[k]);
      assigned += counts[k];
    }
    // Largest remainder; ties resolved train > val > test.
    while (assigned < n) {
      int pick = 0;
      for (int k = 1; k < 3; ++k) {
        if (remainders[k] > remainders[pick]) pick = k;
      }
      ++counts[pick];
      remainders[pick] = -1.0;
      ++assigned;
    }
    size_t cursor = 0;
    for (int k = 0; k < 3; ++k) {
      for (size_t c = 0; c < counts[k]; ++c) {
        dests[k]->push_back(bin[cursor++]);
      }
    }
  }
  return out;
}

Dataset subset(const Dataset& ds, const std::vector<size_t>& indices) {
  Dataset out;
  out.temps = ds.temps;
  out.ref_temp = ds.ref_temp;
  out.records.reserve(indices.size());
  for (size_t i : indices) out.records.push_back(ds.records[i]);
  return out;
}

namespace {

std::string yield_column_name(double temp) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "y%g", temp);
  return buf;
}

}  // namespace

void write_csv(const Dataset& ds, std::ostream& out) {
  out << "s1,s2";
  for (double t : ds.temps) out << ',' << yield_column_name(t);
  out << ",label\n";
  char buf[32];
  for (const auto& rec : ds.records) {
    out << rec.s1.str() << ',' << rec.s2.str();
    for (double y : rec.yields) {
      std::snprintf(buf, sizeof buf, "%.6f", y);
      out << ',' << buf;
    }
    out << ',' << label_name(rec.label) << '\n';
  }
}

void write_csv_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  }
  write_csv(ds, out);
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, "line 1: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::istringstream cols(line);
    std::string col;
    while (std::getline(cols, col, ',')) header.push_back(col);
  }
  if (header.size() < 4 || header[0] != "s1" || header[1] != "s2" ||
      header.back() != "label") {
    throw Error(ErrorCode::ParseError, "line 1: expected header s1,s2,y*...,label");
  }
  Dataset ds;
  ds.temps.clear();
  for (size_t c = 2; c + 1 < header.size(); ++c) {
    if (header[c].size() < 2 || header[c][0] != 'y') {
      throw Error(ErrorCode::ParseError, "line 1: bad yield column '" + header[c] + "'");
    }
    ds.temps.push_back(std::stod(header[c].substr(1)));
  }
  if (std::find(ds.temps.begin(), ds.temps.end(), ds.ref_temp) == ds.temps.end()) {
    ds.ref_temp = ds.temps.front();
  }

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream cols(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(cols, field, ',')) fields.push_back(field);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    YieldRecord rec;
    try {
      rec.s1 = DnaSeq::parse(fields[0]);
      rec.s2 = DnaSeq::parse(fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    for (size_t c = 2; c + 1 < fields.size(); ++c) {
      double y;
      try {
        size_t used = 0;
        y = std::stod(fields[c], &used);
        if (used != fields[c].size()) throw std::invalid_argument(fields[c]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                               ": bad yield '" + fields[c] + "'");
      }
      if (y < 0.0 || y > 1.0) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                               ": yield out of range '" + fields[c] + "'");
      }
      rec.yields.push_back(y);
    }
    const std::string& lab = fields.back();
    if (lab == "High") {
      rec.label = Label::High;
    } else if (lab == "Low") {
      rec.label = Label::Low;
    } else {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": bad label '" + lab + "'");
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path);
  }
  return read_csv(in);
}

}  // namespace hybseq
