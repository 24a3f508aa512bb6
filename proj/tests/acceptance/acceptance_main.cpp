// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exit status 0 iff all pass.
//
// The desk-scale pipeline (criteria 7, 8, 11) trains real models on a seeded
// 50K-pair dataset. Everything is deterministic given the seeds fixed here.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "../support/gradient_check.hpp"
#include "hybseq/bench.hpp"
#include "hybseq/design.hpp"
#include "hybseq/discriminant.hpp"
#include "hybseq/features.hpp"
#include "hybseq/metrics.hpp"
#include "hybseq/train.hpp"

using namespace hybseq;

namespace {

constexpr uint64_t kDeskSeed = 42;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

template <class Fn>
void criterion(int number, const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = fn();
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s criterion %d (%s): %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL",
              number, name.c_str(), outcome.detail.c_str(), secs);
  std::fflush(stdout);
  if (!outcome.pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// Shared desk-scale state built once and reused by criteria 7, 8, 9, 11.
struct DeskState {
  Dataset dataset;
  Dataset train_ds, val_ds, test_ds;
  std::vector<std::vector<double>> train_feats, test_feats;  // unmasked, raw
  Standardizer standardizer;                                 // full 9 features
  std::vector<Label> train_labels, test_labels;
  LdaModel lda;
  double lda_mcc = 0, qda_mcc = 0;
  ModelGraph lite;
  std::vector<double> lite_test_preds;
  double lite_mcc = 0;
  bool ready = false;
};

DeskState g_desk;

void build_desk_dataset() {
  DatasetConfig cfg;
  cfg.seed = kDeskSeed;
  YieldOracle oracle(NnParamTable::defaults());
  GenerateResult gen = generate(cfg, [&](const DnaSeq& a, const DnaSeq& b) {
    return oracle.profile(a, b, cfg.temps);
  });
  g_desk.dataset = std::move(gen.dataset);
  SplitIndices split = stratified_split(g_desk.dataset, 0.8, 0.1, 0.1, 10, kDeskSeed);
  g_desk.train_ds = subset(g_desk.dataset, split.train);
  g_desk.val_ds = subset(g_desk.dataset, split.val);
  g_desk.test_ds = subset(g_desk.dataset, split.test);

  const NnParamTable& nn = NnParamTable::defaults();
  auto rows_of = [&](const Dataset& ds) {
    std::vector<std::vector<double>> rows(ds.records.size());
    for (size_t i = 0; i < ds.records.size(); ++i) {
      FeatureVector f = extract(ds.records[i].s1, ds.records[i].s2, nn);
      rows[i].assign(f.v.begin(), f.v.end());
    }
    return rows;
  };
  g_desk.train_feats = rows_of(g_desk.train_ds);
  g_desk.test_feats = rows_of(g_desk.test_ds);
  for (const auto& rec : g_desk.train_ds.records) g_desk.train_labels.push_back(rec.label);
  for (const auto& rec : g_desk.test_ds.records) g_desk.test_labels.push_back(rec.label);
  g_desk.standardizer = Standardizer::fit(g_desk.train_feats);
}

std::vector<std::vector<double>> masked_standardized(
    const std::vector<std::vector<double>>& raw, const FeatureMask& mask,
    const Standardizer& st) {
  const auto cols = mask.columns();
  std::vector<std::vector<double>> out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    out[i].reserve(cols.size());
    for (int c : cols) out[i].push_back((raw[i][c] - st.mean[c]) / st.std[c]);
  }
  return out;
}

double lda_test_mcc(const FeatureMask& mask, LdaModel* keep = nullptr) {
  auto trz = masked_standardized(g_desk.train_feats, mask, g_desk.standardizer);
  auto tez = masked_standardized(g_desk.test_feats, mask, g_desk.standardizer);
  LdaModel model = lda_fit(trz, g_desk.train_labels);
  std::vector<Label> pred;
  pred.reserve(tez.size());
  for (const auto& row : tez) pred.push_back(lda_predict(model, row));
  const double value = mcc(confusion_counts(pred, g_desk.test_labels));
  if (keep) *keep = std::move(model);
  return value;
}

// ---------------------------------------------------------------------------

Outcome criterion1_alignment_goldens() {
  struct Golden {
    const char *a, *b;
    int score;
  };
  const Golden goldens[] = {
      {"GAATACTGTCAGTGAGAGGATCTGCC", "GAATACTGTCAGTGAGAGGATCTGCC", 130},
      {"TTGTCATACGCTGTAAGAG", "TTGTCATCCGCTGTAAGCG", 77},
      {"AAATCAGGTATGCGGTAAG", "AAATCAGGTACGTTGCGGTAAG", 86},
      {"CTGCGGCGCCGTTTGCATGCTCTCG", "AGAGCAAACGGCGCCGCAG", 31},
  };
  std::string got;
  bool ok = true;
  for (const auto& g : goldens) {
    const int s = semi_global_score(DnaSeq::parse(g.a), DnaSeq::parse(g.b));
    ok = ok && s == g.score;
    got += fmt("%d ", s);
  }
  return {ok, "scores " + got + "(want 130 77 86 31, exact)"};
}

Outcome criterion2_oracle_equivalence() {
  Rng rng(kDeskSeed);
  const AlignParams p;
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int na = rng.range(1, 10), nb = rng.range(1, 10);
    std::string a, b;
    for (int i = 0; i < na; ++i) a.push_back(index_base(rng.range(0, 3)));
    for (int i = 0; i < nb; ++i) b.push_back(index_base(rng.range(0, 3)));
    const DnaSeq sa = DnaSeq::parse(a), sb = DnaSeq::parse(b);
    if (semi_global_score(sa, sb, p) != brute_force_score(sa, sb, p)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d/200 DP vs brute-force mismatches", mismatches)};
}

Outcome criterion3_equilibrium() {
  TubeSpec quad;
  quad.k_ab = 1e6;
  const double y = equilibrate(quad).yield;
  const bool quad_ok = std::abs(y - 0.38197) <= 1e-4;

  Rng rng(kDeskSeed);
  double worst_rel = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    TubeSpec spec;
    spec.a0 = std::pow(10.0, rng.uniform(-8, -4));
    spec.b0 = std::pow(10.0, rng.uniform(-8, -4));
    spec.k_aa = rng.bernoulli(0.2) ? 0.0 : std::pow(10.0, rng.uniform(-3, 15));
    spec.k_bb = rng.bernoulli(0.2) ? 0.0 : std::pow(10.0, rng.uniform(-3, 15));
    spec.k_ab = rng.bernoulli(0.2) ? 0.0 : std::pow(10.0, rng.uniform(-3, 15));
    TubeState st = equilibrate(spec);
    const double ra = std::abs(st.a + 2 * st.c_aa + st.c_ab - spec.a0) / spec.a0;
    const double rb = std::abs(st.b + 2 * st.c_bb + st.c_ab - spec.b0) / spec.b0;
    worst_rel = std::max({worst_rel, ra, rb});
  }
  const bool mass_ok = worst_rel <= 1e-9;
  return {quad_ok && mass_ok,
          fmt("quadratic yield %.6f (0.38197 +/- 1e-4), worst mass residual %.2e "
              "(<= 1e-9 rel over 10^4 tubes)",
              y, worst_rel)};
}

Outcome criterion4_thermo_directions() {
  const NnParamTable& nn = NnParamTable::defaults();
  Rng rng(kDeskSeed);
  const DnaSeq s = random_seq(20, rng);
  const double y37 = pair_yield(s, reverse_complement(s), 37.0, nn);
  const bool strong = y37 >= 0.99;

  auto profile = yield_profile(s, reverse_complement(s), canonical_temps(), nn);
  bool monotone = true;
  for (size_t i = 1; i < profile.size(); ++i) {
    monotone = monotone && profile[i] <= profile[i - 1] + 1e-12;
  }

  const DnaSeq dimer = DnaSeq::parse("CCATGGAGGCGCGCCTTT");
  TubeSpec tube;
  tube.k_aa = duplex_energy(dimer, dimer, {}, nn).assoc_const(37.0);
  TubeState st = equilibrate(tube);
  const bool dimer_dominant = st.c_aa > st.a;

  return {strong && monotone && dimer_dominant,
          fmt("perfect 20-mer yield@37 %.4f (>= 0.99), monotone %s, homodimer "
              "%.3g M > monomer %.3g M %s",
              y37, monotone ? "yes" : "NO", st.c_aa, st.a,
              dimer_dominant ? "yes" : "NO")};
}

Outcome criterion5_gradient_checks() {
  using hybseq::testing::gradient_check;
  using hybseq::testing::random_input;
  Rng rng(kDeskSeed);
  double worst = 0;
  auto probe = [&](ModelGraph& g, std::vector<int> shape) {
    Tensor x = random_input(shape, rng);
    worst = std::max(worst, gradient_check(g, x, rng));
  };
  {
    ModelGraph g("t", {2, 4, 6});
    g.add(std::make_unique<Conv2D>(2, 3, 4, 3));
    g.init_weights(rng);
    probe(g, {2, 2, 4, 6});
  }
  {
    ModelGraph g("t", {3, 9});
    g.add(std::make_unique<Conv1D>(3, 5, 3));
    g.init_weights(rng);
    probe(g, {2, 3, 9});
  }
  {
    ModelGraph g("t", {6});
    g.add(std::make_unique<Dense>(6, 4));
    g.init_weights(rng);
    probe(g, {3, 6});
  }
  {
    ModelGraph g("t", {4, 5});
    g.add(std::make_unique<BatchNorm>(4));
    probe(g, {3, 4, 5});
  }
  {
    ModelGraph g("t", {8});
    g.add(std::make_unique<Dropout>(0.4));
    probe(g, {4, 8});
  }
  {
    ModelGraph g("t", {5});
    g.add(std::make_unique<Sigmoid>());
    probe(g, {4, 5});
  }
  {
    // The repeated conv -> relu -> batchnorm motif plus the dense head.
    ModelGraph g("t", {2, 4, 8});
    g.add(std::make_unique<Conv2D>(2, 4, 4, 3));
    g.add(std::make_unique<ReLU>());
    g.add(std::make_unique<BatchNorm>(4));
    g.add(std::make_unique<Flatten>());
    g.add(std::make_unique<Dense>(24, 3));
    g.init_weights(rng);
    probe(g, {2, 2, 4, 8});
  }

  // Both losses against central differences.
  const double h = 1e-7;
  for (bool bce : {false, true}) {
    Tensor pred({6, 1});
    std::vector<double> target(6);
    for (double& v : pred.val) v = bce ? rng.uniform(0.2, 0.8) : rng.uniform(-0.5, 1.5);
    for (double& t : target) {
      t = bce ? static_cast<double>(rng.bernoulli(0.5)) : rng.uniform(0.0, 1.0);
    }
    auto loss_of = [&](const Tensor& q) { return bce ? bce_loss(q, target) : mse_loss(q, target); };
    LossValue base = loss_of(pred);
    for (size_t i = 0; i < pred.numel(); ++i) {
      Tensor up = pred, down = pred;
      up.val[i] += h;
      down.val[i] -= h;
      const double fd = (loss_of(up).value - loss_of(down).value) / (2 * h);
      worst = std::max(worst, hybseq::testing::grad_rel_err(base.grad.val[i], fd));
    }
  }
  return {worst < 1e-4, fmt("worst relative error %.3e (< 1e-4)", worst)};
}

Outcome criterion6_architectures() {
  ModelGraph cnn = build_cnn();        // construction validates flatten width 384
  ModelGraph lite = build_cnn_lite();  // construction validates flatten width 512
  const size_t cnn_params = cnn.parameter_count();
  const size_t lite_params = lite.parameter_count();
  const bool cnn_ok = cnn_params >= 2800000 * 0.9 && cnn_params <= 2800000 * 1.1;
  const bool lite_ok = lite_params >= 470000 * 0.9 && lite_params <= 470000 * 1.1;
  return {cnn_ok && lite_ok,
          fmt("cnn flatten 384 with %zu params (2.8M +/- 10%%), cnn-lite flatten 512 "
              "with %zu params (470K +/- 10%%)",
              cnn_params, lite_params)};
}

Outcome criterion7_desk_pipeline() {
  build_desk_dataset();

  // (a) LDA and QDA on the 9 standardized features.
  g_desk.lda_mcc = lda_test_mcc(FeatureMask::all(), &g_desk.lda);
  {
    auto trz = masked_standardized(g_desk.train_feats, FeatureMask::all(), g_desk.standardizer);
    auto tez = masked_standardized(g_desk.test_feats, FeatureMask::all(), g_desk.standardizer);
    QdaModel qda = qda_fit(trz, g_desk.train_labels);
    std::vector<Label> pred;
    for (const auto& row : tez) pred.push_back(qda_predict(qda, row));
    g_desk.qda_mcc = mcc(confusion_counts(pred, g_desk.test_labels));
  }

  // (b) CNN_Lite per the published training recipe (Adam 1e-4, MSE, early
  // stopping patience 3); batch reduced for the desk-scale step budget.
  g_desk.lite = build_cnn_lite();
  Rng init(kDeskSeed);
  g_desk.lite.init_weights(init);
  TrainConfig cfg;
  cfg.lr = 1e-4;
  cfg.batch_size = 32;
  cfg.loss = TrainConfig::LossKind::MSE;
  cfg.patience = 3;
  cfg.seed = kDeskSeed;
  SampleSet train_set = SampleSet::from_pairs(g_desk.train_ds);
  SampleSet val_set = SampleSet::from_pairs(g_desk.val_ds);
  TrainResult result = train_model(g_desk.lite, train_set, val_set, cfg);

  SampleSet test_set = SampleSet::from_pairs(g_desk.test_ds);
  g_desk.lite_test_preds = predict(g_desk.lite, test_set, 256);
  std::vector<Label> pred;
  for (double p : g_desk.lite_test_preds) {
    pred.push_back(p >= 0.2 ? Label::High : Label::Low);
  }
  g_desk.lite_mcc = mcc(confusion_counts(pred, g_desk.test_labels));
  g_desk.ready = true;

  const bool a_ok = g_desk.lda_mcc >= 0.75 && g_desk.qda_mcc >= 0.75;
  const bool b_ok = g_desk.lite_mcc >= 0.85;
  const bool c_ok = g_desk.lite_mcc > g_desk.lda_mcc;
  return {a_ok && b_ok && c_ok,
          fmt("n=%zu; LDA %.4f, QDA %.4f (>= 0.75); CNN_Lite %.4f (>= 0.85) after %zu "
              "epochs; ordering CNN_Lite > LDA %s",
              g_desk.dataset.records.size(), g_desk.lda_mcc, g_desk.qda_mcc,
              g_desk.lite_mcc, result.history.size(), c_ok ? "holds" : "FAILS")};
}

Outcome criterion8_ablation() {
  if (!g_desk.ready) return {false, "desk pipeline unavailable"};
  const double aln_only = lda_test_mcc(FeatureMask::of({FeatureGroup::Aln}));
  const double aln_free = lda_test_mcc(FeatureMask::of(
      {FeatureGroup::GC, FeatureGroup::SC, FeatureGroup::PC, FeatureGroup::SMFE}));
  const bool gap_ok = aln_only - aln_free >= 0.3;

  // Permutation test between the full model and the Aln+GC variant on
  // per-sample correctness, 5000 iterations, fixed seed.
  LdaModel full;
  lda_test_mcc(FeatureMask::all(), &full);
  LdaModel alngc;
  lda_test_mcc(FeatureMask::of({FeatureGroup::Aln, FeatureGroup::GC}), &alngc);
  auto correctness = [&](const LdaModel& m, const FeatureMask& mask) {
    auto tez = masked_standardized(g_desk.test_feats, mask, g_desk.standardizer);
    std::vector<int> correct;
    correct.reserve(tez.size());
    for (size_t i = 0; i < tez.size(); ++i) {
      correct.push_back(lda_predict(m, tez[i]) == g_desk.test_labels[i] ? 1 : 0);
    }
    return correct;
  };
  const auto correct_full = correctness(full, FeatureMask::all());
  const auto correct_alngc =
      correctness(alngc, FeatureMask::of({FeatureGroup::Aln, FeatureGroup::GC}));
  const double p1 = permutation_test(correct_full, correct_alngc, 5000, kDeskSeed);
  const double p2 = permutation_test(correct_full, correct_alngc, 5000, kDeskSeed);
  const bool p_ok = p1 >= 0.0 && p1 <= 1.0 && p1 == p2;

  return {gap_ok && p_ok,
          fmt("Aln-only LDA %.4f vs alignment-free %.4f (gap %.4f >= 0.3); permutation "
              "p=%.4f in [0,1], deterministic per seed %s",
              aln_only, aln_free, aln_only - aln_free, p1, p_ok ? "yes" : "NO")};
}

Outcome criterion9_lcs_filter() {
  if (!g_desk.ready) return {false, "desk pipeline unavailable"};

  // Exact equivalence with the brute-force double loop on 500 sequences.
  Rng rng(kDeskSeed);
  std::vector<DnaSeq> seqs;
  for (int i = 0; i < 500; ++i) seqs.push_back(random_seq(20, rng));
  CandidateSet set = candidate_pairs(seqs, 5);
  std::map<std::pair<uint32_t, uint32_t>, bool> found;
  for (const auto& p : set.pairs) found[p] = true;
  size_t brute = 0;
  bool exact = true;
  for (uint32_t i = 0; i < seqs.size() && exact; ++i) {
    const DnaSeq rc_i = reverse_complement(seqs[i]);
    for (uint32_t j = i + 1; j < seqs.size(); ++j) {
      const bool hit = brute_lcs(seqs[j], rc_i) >= 5;
      brute += hit;
      if (hit != found.count({i, j})) {
        exact = false;
        break;
      }
    }
  }
  exact = exact && brute == set.pairs.size();

  // High-yield recall at k=5 on the desk dataset.
  const size_t ref_idx = g_desk.dataset.ref_index();
  size_t high = 0, recalled = 0;
  for (const auto& rec : g_desk.dataset.records) {
    if (rec.yields[ref_idx] >= 0.2) {
      ++high;
      if (brute_lcs(rec.s1, reverse_complement(rec.s2)) >= 5) ++recalled;
    }
  }
  const double recall = high ? static_cast<double>(recalled) / high : 1.0;

  // 100K-sequence streaming scan: counts only, bounded memory.
  std::vector<DnaSeq> library;
  library.reserve(100000);
  Rng lib_rng(kDeskSeed + 1);
  for (int i = 0; i < 100000; ++i) library.push_back(random_seq(20, lib_rng));
  uint64_t candidates = 0;
  scan_candidates(library, 5, [&](uint32_t, uint32_t) { ++candidates; });
  const double all_pairs = 0.5 * 100000.0 * 99999.0;
  const double fraction = candidates / all_pairs;

  return {exact && recall >= 0.999 && candidates > 0 && fraction < 1.0,
          fmt("exact on 500 seqs (%zu pairs) %s; high-yield recall %.5f (>= 0.999, "
              "%zu/%zu); 100K scan: %llu candidates, fraction %.4f of all pairs",
              set.pairs.size(), exact ? "yes" : "NO", recall, recalled, high,
              static_cast<unsigned long long>(candidates), fraction)};
}

Outcome criterion10_bench() {
  if (!g_desk.ready) return {false, "desk pipeline unavailable"};

  // 255,701 synthetic pairs, mirroring the published test-set size.
  DatasetConfig cfg;
  cfg.seed = kDeskSeed + 2;
  cfg.target_size = 255701;
  YieldOracle gen_oracle(NnParamTable::defaults());
  Dataset bench_ds = generate(cfg, [&](const DnaSeq& a, const DnaSeq& b) {
                       return gen_oracle.profile(a, b, cfg.temps);
                     }).dataset;
  bench_ds.records.resize(255701);
  const size_t n = bench_ds.records.size();

  // Thermo oracle subject: per-pair yield prediction at 57 C.
  const NnParamTable& nn = NnParamTable::defaults();
  std::vector<double> sink(n);
  auto thermo_pass = [&] {
    YieldOracle oracle(nn);
    for (size_t i = 0; i < n; ++i) {
      sink[i] = oracle.yield_at(bench_ds.records[i].s1, bench_ds.records[i].s2, 57.0);
    }
  };
  BenchReport thermo_report = run_bench("thermo-oracle", 1, n, thermo_pass, 10);

  // CNN_Lite subject: batched inference on pre-encoded images.
  SampleSet encoded = SampleSet::from_pairs(bench_ds);
  std::vector<double> preds;
  auto lite_pass = [&] { preds = predict(g_desk.lite, encoded, 512); };
  BenchReport lite_report = run_bench("cnn-lite", 512, n, lite_pass, 10);

  std::printf("%s%s", thermo_report.table().c_str(), lite_report.table().c_str());
  const bool protocol_ok = thermo_report.trials.size() == 10 &&
                           lite_report.trials.size() == 10 &&
                           thermo_report.mean > 0 && lite_report.mean > 0;
  const double ratio = lite_report.throughput / thermo_report.throughput;
  return {protocol_ok,
          fmt("thermo-oracle %.2f +/- %.2f s (%.0f pairs/s); cnn-lite %.2f +/- %.2f s "
              "(%.0f pairs/s); throughput ratio %.3fx reported, not asserted",
              thermo_report.mean, thermo_report.stddev, thermo_report.throughput,
              lite_report.mean, lite_report.stddev, lite_report.throughput, ratio)};
}

Outcome criterion11_temperature_transfer() {
  if (!g_desk.ready) return {false, "desk pipeline unavailable"};
  // The criterion-7 model (trained on 57 C labels) is evaluated against
  // oracle labels at every other temperature.
  std::vector<Label> pred;
  for (double p : g_desk.lite_test_preds) {
    pred.push_back(p >= 0.2 ? Label::High : Label::Low);
  }
  const auto& temps = g_desk.test_ds.temps;
  std::map<double, double> mcc_at;
  for (size_t t = 0; t < temps.size(); ++t) {
    std::vector<Label> truth;
    truth.reserve(g_desk.test_ds.records.size());
    for (const auto& rec : g_desk.test_ds.records) {
      truth.push_back(label_yield(rec.yields[t]));
    }
    mcc_at[temps[t]] = mcc(confusion_counts(pred, truth));
  }
  const double base = mcc_at[57.0];
  bool transfer_ok = true;
  double worst_below_57 = 0;
  for (double t : {37.0, 42.0, 47.0, 52.0}) {
    const double degradation = base - mcc_at[t];
    worst_below_57 = std::max(worst_below_57, degradation);
    transfer_ok = transfer_ok && degradation <= 0.15;
  }
  const double deg62 = base - mcc_at[62.0];
  const bool deg62_largest = deg62 > worst_below_57;

  std::string detail = "MCC by temp:";
  for (double t : temps) detail += fmt(" %g=%.4f", t, mcc_at[t]);
  detail += fmt("; max degradation below 57C %.4f (<= 0.15); 62C degradation %.4f "
                "largest %s",
                worst_below_57, deg62, deg62_largest ? "yes" : "NO");
  return {transfer_ok && deg62_largest, detail};
}

}  // namespace

int main() {
  std::printf("hybseq acceptance suite (desk seed %llu)\n",
              static_cast<unsigned long long>(kDeskSeed));
  criterion(1, "alignment goldens", criterion1_alignment_goldens);
  criterion(2, "alignment oracle equivalence", criterion2_oracle_equivalence);
  criterion(3, "equilibrium solver", criterion3_equilibrium);
  criterion(4, "thermo directional checks", criterion4_thermo_directions);
  criterion(5, "gradient checks", criterion5_gradient_checks);
  criterion(6, "architecture conformance", criterion6_architectures);
  criterion(7, "desk-scale end-to-end", criterion7_desk_pipeline);
  criterion(8, "ablation structure", criterion8_ablation);
  criterion(9, "LCS filter", criterion9_lcs_filter);
  criterion(10, "benchmark harness", criterion10_bench);
  criterion(11, "temperature transfer", criterion11_temperature_transfer);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
