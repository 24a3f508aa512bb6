#include "hybseq/seq.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hybseq {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidBase: return "InvalidBase";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::TooLong: return "TooLong";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::OneClassOnly: return "OneClassOnly";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

DnaSeq unchecked_seq(std::string bases) { return DnaSeq(std::move(bases)); }

int base_index(char base) {
  switch (base) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
  }
  return -1;
}

char index_base(int index) {
  static constexpr char kBases[4] = {'A', 'C', 'G', 'T'};
  return kBases[index];
}

char complement(char base) {
  switch (base) {
    case 'A': return 'T';
    case 'C': return 'G';
    case 'G': return 'C';
    case 'T': return 'A';
  }
  return '?';
}

DnaSeq DnaSeq::parse(const std::string& text) {
  if (text.empty()) {
    throw Error(ErrorCode::EmptySequence, "empty sequence");
  }
  if (text.size() > kMaxSeqLen) {
    throw Error(ErrorCode::TooLong, "sequence longer than " +
                                        std::to_string(kMaxSeqLen) + " nt (" +
                                        std::to_string(text.size()) + ")");
  }
  std::string bases;
  bases.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    if (base_index(c) < 0) {
      throw Error(ErrorCode::InvalidBase,
                  std::string("invalid base '") + text[i] + "' at index " +
                      std::to_string(i));
    }
    bases.push_back(c);
  }
  return DnaSeq(std::move(bases));
}

DnaSeq reverse_complement(const DnaSeq& s) {
  std::string out(s.size(), '\0');
  for (size_t i = 0; i < s.size(); ++i) {
    out[s.size() - 1 - i] = complement(s[i]);
  }
  return unchecked_seq(std::move(out));
}

double gc_content(const DnaSeq& s) {
  size_t gc = 0;
  for (char c : s) {
    gc += (c == 'G' || c == 'C') ? 1 : 0;
  }
  return static_cast<double>(gc) / static_cast<double>(s.size());
}

DnaSeq random_seq(int len, Rng& rng) {
  if (len < kLibMinLen || len > kLibMaxLen) {
    throw Error(ErrorCode::BadLength, "library sequence length must be in [" +
                                          std::to_string(kLibMinLen) + ", " +
                                          std::to_string(kLibMaxLen) + "], got " +
                                          std::to_string(len));
  }
  // Completion counts for the no-3-run constraint: single[r] / doubled[r] are
  // the number of admissible suffixes of length r when the current run has
  // length 1 / 2. Values fit exactly in a double (4^26 < 2^53).
  std::vector<double> single(len + 1), doubled(len + 1);
  single[0] = doubled[0] = 1.0;
  for (int r = 1; r <= len; ++r) {
    doubled[r] = 3.0 * single[r - 1];
    single[r] = doubled[r - 1] + 3.0 * single[r - 1];
  }

  std::string bases;
  bases.reserve(len);
  int run = 0;
  for (int i = 0; i < len; ++i) {
    const int remaining = len - i - 1;
    double weights[4];
    double total = 0.0;
    for (int b = 0; b < 4; ++b) {
      double w;
      if (!bases.empty() && index_base(b) == bases.back()) {
        w = (run >= 2) ? 0.0 : doubled[remaining];
      } else {
        w = single[remaining];
      }
      weights[b] = w;
      total += w;
    }
    double pick = rng.uniform() * total;
    int choice = 0;
    for (; choice < 3; ++choice) {
      if (pick < weights[choice]) break;
      pick -= weights[choice];
    }
    if (!bases.empty() && index_base(choice) == bases.back()) {
      ++run;
    } else {
      run = 1;
    }
    bases.push_back(index_base(choice));
  }
  return unchecked_seq(std::move(bases));
}

MutationProfile MutationProfile::minor(EditOp op, int count_min, int count_max) {
  return MutationProfile{MutationKind::Minor, {op}, count_min, count_max};
}

MutationProfile MutationProfile::severe(int count_min, int count_max) {
  return MutationProfile{MutationKind::Severe,
                         {EditOp::Insert, EditOp::Delete, EditOp::Substitute},
                         count_min, count_max};
}

void MutationProfile::validate() const {
  if (ops.empty() || count_min > count_max) {
    throw Error(ErrorCode::InvalidArgument, "malformed mutation profile");
  }
  if (kind == MutationKind::Minor) {
    if (ops.size() != 1 || count_min < 1 || count_max > 2) {
      throw Error(ErrorCode::InvalidArgument,
                  "minor profile must use one op kind with counts in [1, 2]");
    }
  } else {
    if (ops.size() != 3 || count_min < 5) {
      throw Error(ErrorCode::InvalidArgument,
                  "severe profile must allow all ops with count_min >= 5");
    }
  }
}

DnaSeq mutate(const DnaSeq& s, const MutationProfile& profile, Rng& rng) {
  constexpr int kRetryCap = 16;
  std::string bases = s.str();
  const int count = rng.range(profile.count_min, profile.count_max);
  for (int op_slot = 0; op_slot < count; ++op_slot) {
    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
      EditOp op = profile.ops[rng.below(profile.ops.size())];
      const int len = static_cast<int>(bases.size());
      if (op == EditOp::Insert) {
        if (len + 1 > kLibMaxLen) continue;
        int pos = static_cast<int>(rng.below(static_cast<uint64_t>(len) + 1));
        bases.insert(bases.begin() + pos, index_base(rng.range(0, 3)));
      } else if (op == EditOp::Delete) {
        if (len - 1 < kLibMinLen) continue;
        bases.erase(bases.begin() + static_cast<int>(rng.below(len)));
      } else {
        int pos = static_cast<int>(rng.below(len));
        int orig = base_index(bases[pos]);
        bases[pos] = index_base((orig + 1 + rng.range(0, 2)) % 4);
      }
      break;
    }
  }
  return unchecked_seq(std::move(bases));
}

OneHotPair one_hot_pair(const DnaSeq& s1, const DnaSeq& s2, int n_max) {
  if (static_cast<int>(s1.size()) > n_max || static_cast<int>(s2.size()) > n_max) {
    throw Error(ErrorCode::TooLong,
                "pair member longer than n_max=" + std::to_string(n_max));
  }
  OneHotPair out;
  out.n_max = n_max;
  out.grid.assign(static_cast<size_t>(2) * 4 * n_max, 0.0);
  const DnaSeq* strands[2] = {&s1, &s2};
  for (int channel = 0; channel < 2; ++channel) {
    const DnaSeq& s = *strands[channel];
    for (size_t col = 0; col < s.size(); ++col) {
      out.grid[(static_cast<size_t>(channel) * 4 + base_index(s[col])) * n_max + col] = 1.0;
    }
  }
  return out;
}

void one_hot_pair_bytes(const DnaSeq& s1, const DnaSeq& s2, int n_max, uint8_t* out) {
  std::fill(out, out + static_cast<size_t>(2) * 4 * n_max, uint8_t{0});
  const DnaSeq* strands[2] = {&s1, &s2};
  for (int channel = 0; channel < 2; ++channel) {
    const DnaSeq& s = *strands[channel];
    for (size_t col = 0; col < s.size(); ++col) {
      out[(static_cast<size_t>(channel) * 4 + base_index(s[col])) * n_max + col] = 1;
    }
  }
}

std::vector<FastaRecord> read_fasta(std::istream& in) {
  std::vector<FastaRecord> records;
  std::string line, id, bases;
  bool have_record = false;
  auto flush = [&] {
    if (!have_record) return;
    FastaRecord rec;
    rec.id = id;
    rec.seq = DnaSeq::parse(bases);
    records.push_back(std::move(rec));
  };
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      flush();
      id = line.substr(1);
      bases.clear();
      have_record = true;
    } else {
      if (!have_record) {
        throw Error(ErrorCode::ParseError,
                    "sequence data before FASTA header at line " +
                        std::to_string(line_no));
      }
      bases += line;
    }
  }
  flush();
  return records;
}

std::vector<FastaRecord> read_fasta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path);
  }
  return read_fasta(in);
}

void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records) {
  for (const auto& rec : records) {
    out << '>' << rec.id << '\n' << rec.seq.str() << '\n';
  }
}

void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  }
  write_fasta(out, records);
}

}  // namespace hybseq
