#include "hybseq/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hybseq {

FeatureMask FeatureMask::all() {
  return FeatureMask{true, true, true, true, true};
}

FeatureMask FeatureMask::of(std::initializer_list<FeatureGroup> groups) {
  FeatureMask m;
  for (FeatureGroup g : groups) {
    switch (g) {
      case FeatureGroup::Aln: m.aln = true; break;
      case FeatureGroup::GC: m.gc = true; break;
      case FeatureGroup::SC: m.sc = true; break;
      case FeatureGroup::PC: m.pc = true; break;
      case FeatureGroup::SMFE: m.smfe = true; break;
    }
  }
  return m;
}

FeatureMask FeatureMask::parse(const std::string& text) {
  FeatureMask m;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    std::string t;
    for (char c : token) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    if (t == "aln") {
      m.aln = true;
    } else if (t == "gc") {
      m.gc = true;
    } else if (t == "sc") {
      m.sc = true;
    } else if (t == "pc") {
      m.pc = true;
    } else if (t == "smfe") {
      m.smfe = true;
    } else if (!t.empty()) {
      throw Error(ErrorCode::InvalidArgument, "unknown feature group '" + token + "'");
    }
  }
  return m;
}

std::vector<int> FeatureMask::columns() const {
  std::vector<int> cols;
  if (aln) cols.push_back(0);
  if (gc) {
    cols.push_back(1);
    cols.push_back(2);
  }
  if (smfe) {
    cols.push_back(3);
    cols.push_back(4);
  }
  if (sc) {
    cols.push_back(5);
    cols.push_back(6);
  }
  if (pc) {
    cols.push_back(7);
    cols.push_back(8);
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::string FeatureMask::str() const {
  std::string out;
  auto add = [&](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (aln) add("Aln");
  if (gc) add("GC");
  if (sc) add("SC");
  if (pc) add("PC");
  if (smfe) add("SMFE");
  return out;
}

FeatureVector extract(const DnaSeq& s1, const DnaSeq& s2, const NnParamTable& nn,
                      const AlignParams& p, double temp_c) {
  FeatureVector f;
  f.v[0] = static_cast<double>(annealing_score(s1, s2, p));
  f.v[1] = gc_content(s1);
  f.v[2] = gc_content(s2);
  f.v[3] = single_structure_score(s1);
  f.v[4] = single_structure_score(s2);
  const DnaSeq* strands[2] = {&s1, &s2};
  for (int k = 0; k < 2; ++k) {
    // Single-sequence tube, species {A, AA}: a + 2 K a^2 = 1 uM.
    const double k_aa = duplex_energy(*strands[k], *strands[k], p, nn).assoc_const(temp_c);
    constexpr double a0 = 1e-6;
    const double a =
        (k_aa == 0.0) ? a0 : 2.0 * a0 / (1.0 + std::sqrt(1.0 + 8.0 * k_aa * a0));
    f.v[5 + k] = a * 1e6;              // uM
    f.v[7 + k] = k_aa * a * a * 1e6;   // uM
  }
  return f;
}

std::vector<double> apply_mask(const FeatureVector& v, const FeatureMask& m) {
  if (m.empty()) {
    throw Error(ErrorCode::EmptyMask, "feature mask selects nothing");
  }
  std::vector<double> out;
  for (int c : m.columns()) out.push_back(v.v[c]);
  return out;
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) {
    throw Error(ErrorCode::TooFew, "standardizer needs at least 2 rows");
  }
  const size_t d = rows[0].size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (const auto& row : rows) {
    if (row.size() != d) {
      throw Error(ErrorCode::LengthMismatch, "ragged feature matrix");
    }
    for (size_t c = 0; c < d; ++c) s.mean[c] += row[c];
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (size_t c = 0; c < d; ++c) s.mean[c] *= inv_n;
  for (const auto& row : rows) {
    for (size_t c = 0; c < d; ++c) {
      const double dlt = row[c] - s.mean[c];
      s.std[c] += dlt * dlt;
    }
  }
  for (size_t c = 0; c < d; ++c) {
    s.std[c] = std::sqrt(s.std[c] * inv_n);
    if (s.std[c] == 0.0) s.std[c] = 1.0;
  }
  return s;
}

std::vector<double> Standardizer::transform(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t c = 0; c < x.size(); ++c) out[c] = (x[c] - mean[c]) / std[c];
  return out;
}

void Standardizer::transform_in_place(std::vector<std::vector<double>>& rows) const {
  for (auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / std[c];
  }
}

FeatureTable extract_table(const Dataset& ds, const NnParamTable& nn,
                           const AlignParams& p, double temp_c) {
  FeatureTable table;
  table.ref_temp = ds.ref_temp;
  const size_t ref_idx = ds.ref_index();
  table.records = ds.records;
  table.features.reserve(ds.records.size());
  table.ref_yields.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    table.features.push_back(extract(rec.s1, rec.s2, nn, p, temp_c));
    table.ref_yields.push_back(rec.yields[ref_idx]);
  }
  return table;
}

void write_features_csv(const FeatureTable& table, std::ostream& out) {
  out << "s1,s2";
  for (int c = 0; c < kFeatureCount; ++c) out << ",f" << c;
  char name[32];
  std::snprintf(name, sizeof name, "y%g", table.ref_temp);
  out << ',' << name << ",label\n";
  char buf[40];
  for (size_t i = 0; i < table.records.size(); ++i) {
    out << table.records[i].s1.str() << ',' << table.records[i].s2.str();
    for (int c = 0; c < kFeatureCount; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", table.features[i].v[c]);
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.6f", table.ref_yields[i]);
    out << ',' << buf << ',' << label_name(table.records[i].label) << '\n';
  }
}

void write_features_csv_file(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  }
  write_features_csv(table, out);
}

FeatureTable read_features_csv(std::istream& in) {
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
  if (header.size() != static_cast<size_t>(kFeatureCount) + 4 || header[0] != "s1" ||
      header[1] != "s2" || header.back() != "label") {
    throw Error(ErrorCode::ParseError, "line 1: expected s1,s2,f0..f8,y*,label");
  }
  FeatureTable table;
  table.ref_temp = std::stod(header[header.size() - 2].substr(1));

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
                  "line " + std::to_string(line_no) + ": wrong field count");
    }
    YieldRecord rec;
    FeatureVector f;
    try {
      rec.s1 = DnaSeq::parse(fields[0]);
      rec.s2 = DnaSeq::parse(fields[1]);
      for (int c = 0; c < kFeatureCount; ++c) f.v[c] = std::stod(fields[2 + c]);
      const double y = std::stod(fields[2 + kFeatureCount]);
      if (y < 0.0 || y > 1.0) throw std::out_of_range("yield");
      rec.yields = {y};
      table.ref_yields.push_back(y);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": " + e.what());
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
    table.records.push_back(std::move(rec));
    table.features.push_back(f);
  }
  return table;
}

FeatureTable read_features_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path);
  }
  return read_features_csv(in);
}

}  // namespace hybseq
