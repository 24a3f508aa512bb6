#include "hybseq/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hybseq {

namespace {

// Unified nearest-neighbor parameters (SantaLucia 1998 / SantaLucia & Hicks
// 2004): dH kcal/mol, dS cal/(mol K).
constexpr const char* kDefaultParamsText = R"(# hybseq nearest-neighbor duplex parameters v1
# stack <top-strand step> <dH kcal/mol> <dS cal/(mol K)>
stack AA -7.9 -22.2
stack AT -7.2 -20.4
stack TA -7.2 -21.3
stack CA -8.5 -22.7
stack GT -8.4 -22.4
stack CT -7.8 -21.0
stack GA -8.2 -22.2
stack CG -10.6 -27.2
stack GC -9.8 -24.4
stack GG -8.0 -19.9
init 0.2 -5.7
terminal_at 2.2 6.9
loop 3.5 0.5
)";

// The 10 canonical steps, in serialization order.
constexpr const char* kCanonicalSteps[10] = {"AA", "AT", "TA", "CA", "GT",
                                             "CT", "GA", "CG", "GC", "GG"};

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

double DuplexEnergy::assoc_const(double temp_c) const {
  if (!bound) return 0.0;
  const double t_k = celsius_to_kelvin(temp_c);
  // Capped below overflow; saturated constants behave identically at uM scale.
  const double exponent = std::min(-dg(temp_c) / (kGasConstant * t_k), 690.0);
  return std::exp(exponent);
}

const StackParams& NnParamTable::stack(char first, char second) const {
  const int i = base_index(first), j = base_index(second);
  return stacks_[static_cast<size_t>(i) * 4 + j];
}

const NnParamTable& NnParamTable::defaults() {
  static const NnParamTable table = NnParamTable::parse_text(kDefaultParamsText);
  return table;
}

NnParamTable NnParamTable::parse_text(const std::string& text) {
  NnParamTable table;
  bool have[10] = {false};
  bool have_init = false, have_terminal = false;
  bool checksum_seen = false;
  uint64_t stated_checksum = 0;

  auto canonical_slot = [](const std::string& step) -> int {
    for (int s = 0; s < 10; ++s) {
      if (step == kCanonicalSteps[s]) return s;
    }
    return -1;
  };

  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  StackParams canonical[10];
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    auto fail = [&](const std::string& why) -> Error {
      return Error(ErrorCode::ParseError,
                   "parameter file line " + std::to_string(line_no) + ": " + why);
    };
    if (key == "stack") {
      std::string step;
      StackParams sp;
      if (!(fields >> step >> sp.dh >> sp.ds)) throw fail("expected: stack XY dh ds");
      if (step.size() != 2 || base_index(step[0]) < 0 || base_index(step[1]) < 0) {
        throw fail("bad step '" + step + "'");
      }
      // Normalize to the canonical representative of the rc-equivalent pair.
      std::string canon = step;
      if (canonical_slot(canon) < 0) {
        canon = {complement(step[1]), complement(step[0])};
      }
      const int slot = canonical_slot(canon);
      if (slot < 0) throw fail("step '" + step + "' has no canonical form");
      if (have[slot]) throw fail("duplicate step '" + step + "'");
      if (sp.dh >= 0) throw fail("stack dH must be negative");
      have[slot] = true;
      canonical[slot] = sp;
    } else if (key == "init") {
      if (!(fields >> table.init.dh >> table.init.ds)) throw fail("expected: init dh ds");
      have_init = true;
    } else if (key == "terminal_at") {
      if (!(fields >> table.terminal_at.dh >> table.terminal_at.ds)) {
        throw fail("expected: terminal_at dh ds");
      }
      have_terminal = true;
    } else if (key == "loop") {
      if (!(fields >> table.loop_base >> table.loop_per_nt)) {
        throw fail("expected: loop base per_nt");
      }
    } else if (key == "checksum") {
      std::string hex;
      if (!(fields >> hex)) throw fail("expected: checksum value");
      stated_checksum = std::stoull(hex, nullptr, 16);
      checksum_seen = true;
    } else {
      throw fail("unknown key '" + key + "'");
    }
  }
  for (int s = 0; s < 10; ++s) {
    if (!have[s]) {
      throw Error(ErrorCode::ParseError,
                  std::string("parameter file misses stack ") + kCanonicalSteps[s]);
    }
  }
  if (!have_init || !have_terminal) {
    throw Error(ErrorCode::ParseError, "parameter file misses init/terminal_at");
  }
  for (int s = 0; s < 10; ++s) {
    const char a = kCanonicalSteps[s][0], b = kCanonicalSteps[s][1];
    table.stacks_[static_cast<size_t>(base_index(a)) * 4 + base_index(b)] = canonical[s];
    const char ra = complement(b), rb = complement(a);
    table.stacks_[static_cast<size_t>(base_index(ra)) * 4 + base_index(rb)] = canonical[s];
  }
  if (checksum_seen && stated_checksum != table.checksum()) {
    throw Error(ErrorCode::ParseError, "parameter file checksum mismatch");
  }
  return table;
}

NnParamTable NnParamTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

std::string NnParamTable::serialize() const {
  std::ostringstream out;
  out << "# hybseq nearest-neighbor duplex parameters v1\n";
  for (const char* step : kCanonicalSteps) {
    const StackParams& sp = stack(step[0], step[1]);
    out << "stack " << step << ' ' << format_value(sp.dh) << ' ' << format_value(sp.ds)
        << '\n';
  }
  out << "init " << format_value(init.dh) << ' ' << format_value(init.ds) << '\n';
  out << "terminal_at " << format_value(terminal_at.dh) << ' '
      << format_value(terminal_at.ds) << '\n';
  out << "loop " << format_value(loop_base) << ' ' << format_value(loop_per_nt) << '\n';
  std::string body = out.str();
  char checksum_line[32];
  std::snprintf(checksum_line, sizeof checksum_line, "checksum %016llx\n",
                static_cast<unsigned long long>(checksum()));
  return body + checksum_line;
}

uint64_t NnParamTable::checksum() const {
  // Over the canonical numeric content, independent of file formatting.
  std::ostringstream out;
  for (const char* step : kCanonicalSteps) {
    const StackParams& sp = stack(step[0], step[1]);
    out << step << ':' << format_value(sp.dh) << ':' << format_value(sp.ds) << ';';
  }
  out << "init:" << format_value(init.dh) << ':' << format_value(init.ds) << ';';
  out << "term:" << format_value(terminal_at.dh) << ':' << format_value(terminal_at.ds)
      << ';';
  out << "loop:" << format_value(loop_base) << ':' << format_value(loop_per_nt) << ';';
  return fnv1a(out.str());
}

namespace {

// A maximal run of consecutive WC-matched alignment columns.
struct PairedRun {
  int start_col = 0, end_col = 0;  // inclusive column span
  StackParams stacks;              // summed over the run's adjacent pairs
  char first_base = 'A', last_base = 'A';

  double at_terms(const NnParamTable& nn, bool first_end, bool last_end) const {
    double dg = 0.0;
    if (first_end && (first_base == 'A' || first_base == 'T')) {
      dg += nn.terminal_at.dh - kLoopRefTempK * nn.terminal_at.ds / 1000.0;
    }
    if (last_end && (last_base == 'A' || last_base == 'T')) {
      dg += nn.terminal_at.dh - kLoopRefTempK * nn.terminal_at.ds / 1000.0;
    }
    return dg;
  }
};

}  // namespace

DuplexEnergy duplex_energy(const DnaSeq& s1, const DnaSeq& s2,
                           const AlignParams& p, const NnParamTable& nn) {
  // Canonical argument order keeps the energy symmetric under swap even when
  // co-optimal tracebacks differ.
  if (s2.str() < s1.str()) {
    return duplex_energy(s2, s1, p, nn);
  }
  const AlignResult trace = semi_global_trace(s1, reverse_complement(s2), p);
  const std::string& top = trace.aligned_a;
  const std::string& bottom = trace.aligned_b;

  // Candidate helices: matched runs of length >= 2 (a lone pair stacks with
  // nothing and only buys loop penalties).
  std::vector<PairedRun> runs;
  const int cols = static_cast<int>(top.size());
  for (int c = 0; c < cols;) {
    if (top[c] != '-' && bottom[c] != '-' && top[c] == bottom[c]) {
      PairedRun run;
      run.start_col = c;
      while (c + 1 < cols && top[c + 1] != '-' && bottom[c + 1] != '-' &&
             top[c + 1] == bottom[c + 1]) {
        const StackParams& sp = nn.stack(top[c], top[c + 1]);
        run.stacks.dh += sp.dh;
        run.stacks.ds += sp.ds;
        ++c;
      }
      run.end_col = c;
      if (run.end_col > run.start_col) {
        run.first_base = top[run.start_col];
        run.last_base = top[run.end_col];
        runs.push_back(run);
      }
      ++c;
    } else {
      ++c;
    }
  }
  DuplexEnergy e;
  if (runs.empty()) {
    return e;  // unbound
  }

  // The score-optimal alignment may pair stray short runs whose loop penalties
  // destabilize the duplex. Keep the subset of runs (in order) with the lowest
  // free energy at the loop anchor temperature; dH/dS come from that subset.
  const size_t k = runs.size();
  auto run_dg = [&](const PairedRun& r) {
    return r.stacks.dh - kLoopRefTempK * r.stacks.ds / 1000.0;
  };
  auto loop_dg = [&](const PairedRun& from, const PairedRun& to) {
    const int loop_len = to.start_col - from.end_col - 1;
    return nn.loop_base + nn.loop_per_nt * loop_len;
  };
  std::vector<double> best(k);        // best dG of a chain ending at run j
  std::vector<int> prev(k, -1);
  for (size_t j = 0; j < k; ++j) {
    best[j] = run_dg(runs[j]) + runs[j].at_terms(nn, true, false);
    for (size_t i = 0; i < j; ++i) {
      const double via = best[i] + loop_dg(runs[i], runs[j]) + run_dg(runs[j]);
      if (via < best[j]) {
        best[j] = via;
        prev[j] = static_cast<int>(i);
      }
    }
  }
  size_t last = 0;
  double total = best[0] + runs[0].at_terms(nn, false, true);
  for (size_t j = 1; j < k; ++j) {
    const double t = best[j] + runs[j].at_terms(nn, false, true);
    if (t < total) {
      total = t;
      last = j;
    }
  }

  e.bound = true;
  e.dh = nn.init.dh;
  e.ds = nn.init.ds;
  std::vector<size_t> chain;  // selected runs, first to last
  for (int j = static_cast<int>(last); j >= 0; j = prev[j]) {
    chain.push_back(j);
  }
  std::reverse(chain.begin(), chain.end());
  for (size_t idx = 0; idx < chain.size(); ++idx) {
    const PairedRun& run = runs[chain[idx]];
    e.dh += run.stacks.dh;
    e.ds += run.stacks.ds;
    if (idx + 1 < chain.size()) {
      // Internal unpaired span: pure-entropy loop anchored at 310.15 K.
      const double dg_ref = loop_dg(run, runs[chain[idx + 1]]);
      e.ds -= dg_ref * 1000.0 / kLoopRefTempK;
    }
  }
  const char head = runs[chain.front()].first_base;
  const char tail = runs[chain.back()].last_base;
  for (char end_base : {head, tail}) {
    if (end_base == 'A' || end_base == 'T') {
      e.dh += nn.terminal_at.dh;
      e.ds += nn.terminal_at.ds;
    }
  }
  return e;
}

double single_structure_score(const DnaSeq& s) {
  const int n = static_cast<int>(s.size());
  if (n < 8) {
    throw Error(ErrorCode::TooShort, "structure score needs length >= 8");
  }
  auto wc = [&](int i, int j) {
    return s[i] == complement(s[j]);
  };
  // Nussinov with minimum hairpin loop of 3 unpaired bases.
  std::vector<int> best(static_cast<size_t>(n) * n, 0);
  auto at = [&](int i, int j) -> int& { return best[static_cast<size_t>(i) * n + j]; };
  for (int span = 4; span < n; ++span) {
    for (int i = 0; i + span < n; ++i) {
      const int j = i + span;
      int v = std::max(at(i + 1, j), at(i, j - 1));
      if (wc(i, j)) v = std::max(v, at(i + 1, j - 1) + 1);
      for (int k = i + 1; k < j; ++k) {
        v = std::max(v, at(i, k) + at(k + 1, j));
      }
      at(i, j) = v;
    }
  }
  return -1.0 * at(0, n - 1);
}

namespace {

struct Residuals {
  double f1, f2;
};

inline Residuals residuals(double a, double b, const TubeSpec& s) {
  return {a + 2.0 * s.k_aa * a * a + s.k_ab * a * b - s.a0,
          b + 2.0 * s.k_bb * b * b + s.k_ab * a * b - s.b0};
}

// Free monomer a at fixed b: positive root of 2 K_AA a^2 + (1 + K_AB b) a = a0.
inline double solve_a_given_b(double b, const TubeSpec& s) {
  const double lin = 1.0 + s.k_ab * b;
  if (s.k_aa == 0.0) return s.a0 / lin;
  return 2.0 * s.a0 / (lin + std::sqrt(lin * lin + 8.0 * s.k_aa * s.a0));
}

TubeState finish(double a, double b, const TubeSpec& s) {
  TubeState st;
  st.a = a;
  st.b = b;
  st.c_aa = s.k_aa * a * a;
  st.c_bb = s.k_bb * b * b;
  st.c_ab = s.k_ab * a * b;
  st.yield = std::clamp(st.c_ab / std::min(s.a0, s.b0), 0.0, 1.0);
  return st;
}

}  // namespace

TubeState equilibrate(const TubeSpec& spec) {
  if (!(spec.a0 > 0.0) || !(spec.b0 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "initial concentrations must be positive");
  }
  if (spec.k_aa < 0 || spec.k_bb < 0 || spec.k_ab < 0 ||
      !std::isfinite(spec.k_aa) || !std::isfinite(spec.k_bb) || !std::isfinite(spec.k_ab)) {
    throw Error(ErrorCode::InvalidArgument, "association constants must be finite and >= 0");
  }
  const double tol_a = std::min(1e-12, 1e-10 * spec.a0);
  const double tol_b = std::min(1e-12, 1e-10 * spec.b0);
  constexpr int kMaxIter = 200;

  // Damped Newton on (ln a, ln b).
  double u = std::log(spec.a0), v = std::log(spec.b0);
  double a = spec.a0, b = spec.b0;
  Residuals r = residuals(a, b, spec);
  auto norm = [](const Residuals& rr) { return std::abs(rr.f1) + std::abs(rr.f2); };
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if (std::abs(r.f1) <= tol_a && std::abs(r.f2) <= tol_b) {
      return finish(a, b, spec);
    }
    const double j11 = a * (1.0 + 4.0 * spec.k_aa * a + spec.k_ab * b);
    const double j12 = spec.k_ab * a * b;
    const double j21 = spec.k_ab * a * b;
    const double j22 = b * (1.0 + 4.0 * spec.k_bb * b + spec.k_ab * a);
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0 || !std::isfinite(det)) break;
    double du = -(r.f1 * j22 - j12 * r.f2) / det;
    double dv = -(j11 * r.f2 - r.f1 * j21) / det;
    du = std::clamp(du, -30.0, 30.0);
    dv = std::clamp(dv, -30.0, 30.0);
    double step = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 50; ++halving) {
      const double nu = u + step * du, nv = v + step * dv;
      const double na = std::exp(nu), nb = std::exp(nv);
      const Residuals nr = residuals(na, nb, spec);
      if (std::isfinite(nr.f1) && std::isfinite(nr.f2) && norm(nr) < norm(r)) {
        u = nu, v = nv, a = na, b = nb, r = nr;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  if (std::abs(r.f1) <= tol_a && std::abs(r.f2) <= tol_b) {
    return finish(a, b, spec);
  }

  // Fallback: nested bisection on b. G(b) = residual of the b balance with
  // a(b) from the closed-form quadratic; strictly increasing on (0, b0].
  double lo = 0.0, hi = spec.b0;
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double am = solve_a_given_b(mid, spec);
    const double g = mid + 2.0 * spec.k_bb * mid * mid + spec.k_ab * am * mid - spec.b0;
    if (g > 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  b = 0.5 * (lo + hi);
  a = solve_a_given_b(b, spec);
  r = residuals(a, b, spec);
  if (std::abs(r.f1) <= tol_a && std::abs(r.f2) <= tol_b) {
    return finish(a, b, spec);
  }
  throw Error(ErrorCode::NoConvergence,
              "equilibrium solve stalled; pathological association constants");
}

double pair_yield(const DnaSeq& s1, const DnaSeq& s2, double temp_c,
                  const NnParamTable& nn, const AlignParams& p) {
  YieldOracle oracle(nn, p);
  return oracle.profile(s1, s2, {temp_c})[0];
}

std::vector<double> yield_profile(const DnaSeq& s1, const DnaSeq& s2,
                                  const std::vector<double>& temps,
                                  const NnParamTable& nn, const AlignParams& p) {
  if (temps.empty()) {
    throw Error(ErrorCode::InvalidArgument, "temperature list must be non-empty");
  }
  YieldOracle oracle(nn, p);
  return oracle.profile(s1, s2, temps);
}

const DuplexEnergy& YieldOracle::homodimer(const DnaSeq& s) {
  auto it = cache_.find(s.str());
  if (it != cache_.end()) {
    return it->second;
  }
  DuplexEnergy e = duplex_energy(s, s, params_, nn_);
  return cache_.emplace(s.str(), e).first->second;
}

double YieldOracle::yield_at(const DnaSeq& s1, const DnaSeq& s2, double temp_c) {
  return profile(s1, s2, {temp_c})[0];
}

std::vector<double> YieldOracle::profile(const DnaSeq& s1, const DnaSeq& s2,
                                         const std::vector<double>& temps) {
  // Canonical order: the tube solve then runs the identical float sequence
  // for (s1, s2) and (s2, s1), making the yield bitwise symmetric.
  if (s2.str() < s1.str()) {
    return profile(s2, s1, temps);
  }
  const DuplexEnergy e_ab = duplex_energy(s1, s2, params_, nn_);
  const DuplexEnergy e_aa = homodimer(s1);
  const DuplexEnergy e_bb = homodimer(s2);
  std::vector<double> yields;
  yields.reserve(temps.size());
  for (double t : temps) {
    if (t < 0.0 || t > 100.0) {
      throw Error(ErrorCode::InvalidArgument, "temperature must be in [0, 100] C");
    }
    TubeSpec spec;
    spec.temp_c = t;
    spec.k_ab = e_ab.assoc_const(t);
    spec.k_aa = e_aa.assoc_const(t);
    spec.k_bb = e_bb.assoc_const(t);
    yields.push_back(equilibrate(spec).yield);
  }
  return yields;
}

TempSimilarity temp_similarity(const std::vector<std::vector<double>>& yields,
                               const std::vector<double>& temps) {
  const size_t t = temps.size();
  TempSimilarity sim;
  sim.temps = temps;
  sim.mae.assign(t * t, 0.0);
  sim.mse.assign(t * t, 0.0);
  if (yields.empty()) return sim;
  for (const auto& row : yields) {
    if (row.size() != t) {
      throw Error(ErrorCode::LengthMismatch, "yield row width != temperature count");
    }
  }
  const double inv_n = 1.0 / static_cast<double>(yields.size());
  for (size_t i = 0; i < t; ++i) {
    for (size_t j = i + 1; j < t; ++j) {
      double mae = 0, mse = 0;
      for (const auto& row : yields) {
        const double d = row[i] - row[j];
        mae += std::abs(d);
        mse += d * d;
      }
      mae *= inv_n;
      mse *= inv_n;
      sim.mae[i * t + j] = sim.mae[j * t + i] = mae;
      sim.mse[i * t + j] = sim.mse[j * t + i] = mse;
    }
  }
  return sim;
}

}  // namespace hybseq
