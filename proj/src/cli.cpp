#include "hybseq/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hybseq/bench.hpp"
#include "hybseq/design.hpp"
#include "hybseq/discriminant.hpp"
#include "hybseq/features.hpp"
#include "hybseq/metrics.hpp"
#include "hybseq/train.hpp"
#include "hybseq/util.hpp"

namespace hybseq {

namespace {

// ---------------------------------------------------------------------------
// Shared option state

struct GlobalOpts {
  uint64_t seed = 0;
  int threads = 0;
  std::string params_file;

  const NnParamTable& nn() const {
    if (!params_file.empty()) {
      static NnParamTable custom = NnParamTable::load_file(params_file);
      return custom;
    }
    if (const char* env = std::getenv("HYBSEQ_PARAMS"); env && *env) {
      static NnParamTable from_env = NnParamTable::load_file(env);
      return from_env;
    }
    return NnParamTable::defaults();
  }
};

// ---------------------------------------------------------------------------
// Model bundles. Neural pair models are raw checkpoints; feature models wrap
// a mask, the feature temperature, the standardizer and the classifier.

constexpr const char* kFeatureModelMagic = "hybseq-feature-model v1";

struct FeatureModel {
  std::string kind;  // lda | qda | mlp
  FeatureMask mask = FeatureMask::all();
  double feature_temp = 37.0;
  Standardizer standardizer;
  std::optional<LdaModel> lda;
  std::optional<QdaModel> qda;
  std::optional<ModelGraph> mlp;

  std::vector<double> features_for(const DnaSeq& s1, const DnaSeq& s2,
                                   const NnParamTable& nn) const {
    return standardizer.transform(apply_mask(extract(s1, s2, nn, {}, feature_temp), mask));
  }

  double score_row(const std::vector<double>& z) {
    if (lda) return lda_score(*lda, z);
    if (qda) return qda_score(*qda, z);
    SampleSet one = SampleSet::from_features({z}, {0.0});
    return predict(*mlp, one, 1)[0];
  }

  bool probabilistic() const { return mlp.has_value(); }
};

void save_feature_model(const FeatureModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  }
  out << kFeatureModelMagic << '\n';
  out << "kind " << m.kind << '\n';
  out << "mask " << m.mask.str() << '\n';
  out << "feature_temp " << m.feature_temp << '\n';
  out << "standardizer " << m.standardizer.mean.size() << '\n';
  char buf[40];
  for (const auto* vec : {&m.standardizer.mean, &m.standardizer.std}) {
    for (size_t i = 0; i < vec->size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", (*vec)[i]);
      out << buf << (i + 1 < vec->size() ? ' ' : '\n');
    }
  }
  if (m.lda) {
    save_lda(*m.lda, out);
  } else if (m.qda) {
    save_qda(*m.qda, out);
  } else {
    m.mlp->save(out);
  }
}

FeatureModel load_feature_model(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != kFeatureModelMagic) {
    throw Error(ErrorCode::ParseError, "not a feature-model file");
  }
  FeatureModel m;
  std::string key;
  in >> key >> m.kind;
  std::string mask_text;
  in >> key >> mask_text;
  m.mask = FeatureMask::parse(mask_text);
  in >> key >> m.feature_temp;
  size_t d = 0;
  in >> key >> d;
  m.standardizer.mean.resize(d);
  m.standardizer.std.resize(d);
  for (auto* vec : {&m.standardizer.mean, &m.standardizer.std}) {
    for (double& v : *vec) in >> v;
  }
  std::getline(in, line);  // to end of the std line
  if (m.kind == "lda") {
    m.lda = load_lda(in);
  } else if (m.kind == "qda") {
    m.qda = load_qda(in);
  } else if (m.kind == "mlp") {
    m.mlp = ModelGraph::load(in);
  } else {
    throw Error(ErrorCode::ParseError, "unknown feature model kind '" + m.kind + "'");
  }
  return m;
}

struct LoadedModel {
  std::optional<ModelGraph> pair_model;  // cnn / cnn-lite
  std::optional<FeatureModel> feature_model;

  const std::string& kind() const {
    static const std::string empty;
    if (pair_model) return pair_model->name();
    if (feature_model) return feature_model->kind;
    return empty;
  }
};

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path);
  }
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  LoadedModel m;
  if (first == kFeatureModelMagic) {
    m.feature_model = load_feature_model(in);
  } else {
    m.pair_model = ModelGraph::load(in);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Helpers shared by train / eval / bench

std::vector<Label> labels_at(const Dataset& ds, double temp, double threshold) {
  size_t idx = ds.temps.size();
  for (size_t i = 0; i < ds.temps.size(); ++i) {
    if (ds.temps[i] == temp) idx = i;
  }
  if (idx == ds.temps.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "temperature not present in the dataset columns");
  }
  std::vector<Label> out;
  out.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    out.push_back(label_yield(rec.yields[idx], threshold));
  }
  return out;
}

std::vector<double> yields_at(const Dataset& ds, double temp) {
  size_t idx = ds.temps.size();
  for (size_t i = 0; i < ds.temps.size(); ++i) {
    if (ds.temps[i] == temp) idx = i;
  }
  if (idx == ds.temps.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "temperature not present in the dataset columns");
  }
  std::vector<double> out;
  out.reserve(ds.records.size());
  for (const auto& rec : ds.records) out.push_back(rec.yields[idx]);
  return out;
}

// Masked, standardized feature rows for a dataset (standardizer from caller).
std::vector<std::vector<double>> masked_rows(const Dataset& ds, const NnParamTable& nn,
                                             const FeatureMask& mask, double temp) {
  std::vector<std::vector<double>> rows(ds.records.size());
  parallel_for(ds.records.size(), [&](size_t i) {
    rows[i] = apply_mask(extract(ds.records[i].s1, ds.records[i].s2, nn, {}, temp), mask);
  });
  return rows;
}

MetricsReport eval_feature_model(FeatureModel& model, const Dataset& ds,
                                 const NnParamTable& nn, double eval_temp,
                                 double threshold) {
  auto rows = masked_rows(ds, nn, model.mask, model.feature_temp);
  model.standardizer.transform_in_place(rows);
  std::vector<double> scores(rows.size());
  if (model.mlp) {
    SampleSet set = SampleSet::from_features(rows, std::vector<double>(rows.size(), 0.0));
    scores = predict(*model.mlp, set, 1024);
  } else {
    for (size_t i = 0; i < rows.size(); ++i) {
      scores[i] = model.lda ? lda_score(*model.lda, rows[i]) : qda_score(*model.qda, rows[i]);
    }
  }
  std::vector<Label> truth = labels_at(ds, eval_temp, threshold);
  std::vector<Label> predicted;
  predicted.reserve(scores.size());
  const double cut = model.probabilistic() ? 0.5 : 0.0;
  for (double s : scores) predicted.push_back(s > cut ? Label::High : Label::Low);
  return compute_report(scores, predicted, truth);
}

MetricsReport eval_pair_model(ModelGraph& model, const Dataset& ds, double eval_temp,
                              double threshold) {
  SampleSet set = SampleSet::from_pairs(ds);
  std::vector<double> preds = predict(model, set, 512);
  return compute_regression_report(preds, yields_at(ds, eval_temp),
                                   labels_at(ds, eval_temp, threshold), threshold);
}

void emit_report(const MetricsReport& report, const std::string& record_path) {
  std::cout << report.table();
  std::cout << report.records();
  if (!record_path.empty()) {
    std::ofstream out(record_path);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot open " + record_path + " for writing");
    }
    out << report.records();
  }
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int run_align(const std::string& s1_text, const std::string& s2_text, bool rc,
              bool trace, const AlignParams& p) {
  const DnaSeq s1 = DnaSeq::parse(s1_text);
  DnaSeq s2 = DnaSeq::parse(s2_text);
  if (rc) s2 = reverse_complement(s2);
  if (trace) {
    AlignResult r = semi_global_trace(s1, s2, p);
    std::cout << r.score << '\n' << r.aligned_a << '\n' << r.aligned_b << '\n'
              << r.cigar << '\n';
  } else {
    std::cout << semi_global_score(s1, s2, p) << '\n';
  }
  return 0;
}

int run_thermo(const GlobalOpts& global, const std::string& s1_text,
               const std::string& s2_text, double temp) {
  const NnParamTable& nn = global.nn();
  const DnaSeq s1 = DnaSeq::parse(s1_text);
  const DnaSeq s2 = DnaSeq::parse(s2_text);
  const DuplexEnergy e_ab = duplex_energy(s1, s2, {}, nn);
  const DuplexEnergy e_aa = duplex_energy(s1, s1, {}, nn);
  const DuplexEnergy e_bb = duplex_energy(s2, s2, {}, nn);
  TubeSpec spec;
  spec.temp_c = temp;
  spec.k_ab = e_ab.assoc_const(temp);
  spec.k_aa = e_aa.assoc_const(temp);
  spec.k_bb = e_bb.assoc_const(temp);
  TubeState st = equilibrate(spec);
  char buf[160];
  std::printf("pair %s %s\n", s1.str().c_str(), s2.str().c_str());
  std::printf("temp_c=%g\n", temp);
  auto print_energy = [&](const char* name, const DuplexEnergy& e, double k) {
    if (e.bound) {
      std::snprintf(buf, sizeof buf, "%s dh=%.3f ds=%.3f dg=%.4f K=%.6g\n", name, e.dh,
                    e.ds, e.dg(temp), k);
    } else {
      std::snprintf(buf, sizeof buf, "%s unbound K=0\n", name);
    }
    std::fputs(buf, stdout);
  };
  print_energy("AB", e_ab, spec.k_ab);
  print_energy("AA", e_aa, spec.k_aa);
  print_energy("BB", e_bb, spec.k_bb);
  std::printf("species mol/L: a=%.6e b=%.6e c_aa=%.6e c_bb=%.6e c_ab=%.6e\n", st.a, st.b,
              st.c_aa, st.c_bb, st.c_ab);
  std::printf("yield=%.6f\n", st.yield);
  return 0;
}

int run_generate(const GlobalOpts& global, DatasetConfig cfg, const std::string& out_path) {
  cfg.seed = global.seed;
  YieldOracle oracle(global.nn());
  GenerateResult result = generate(cfg, [&](const DnaSeq& a, const DnaSeq& b) {
    return oracle.profile(a, b, cfg.temps);
  });
  write_csv_file(result.dataset, out_path);
  size_t lo = 0, mid = 0, hi = 0;
  for (const auto& rec : result.dataset.records) {
    const double y = result.dataset.ref_yield(rec);
    (y < 0.1 ? lo : y < 0.9 ? mid : hi)++;
  }
  std::printf("records=%zu families=%zu low=%zu mid=%zu high=%zu -> %s\n",
              result.dataset.records.size(), result.families, lo, mid, hi,
              out_path.c_str());
  for (const auto& w : result.warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  return 0;
}

int run_features(const GlobalOpts& global, const std::string& in_path,
                 const std::string& out_path, double temp) {
  Dataset ds = read_csv_file(in_path);
  const NnParamTable& nn = global.nn();
  FeatureTable table;
  table.ref_temp = ds.ref_temp;
  const size_t ref_idx = ds.ref_index();
  table.records = ds.records;
  table.features.resize(ds.records.size());
  table.ref_yields.resize(ds.records.size());
  parallel_for(ds.records.size(), [&](size_t i) {
    table.features[i] = extract(ds.records[i].s1, ds.records[i].s2, nn, {}, temp);
    table.ref_yields[i] = ds.records[i].yields[ref_idx];
  });
  write_features_csv_file(table, out_path);
  std::printf("features for %zu pairs -> %s\n", table.records.size(), out_path.c_str());
  return 0;
}

struct TrainOpts {
  std::string model = "cnn-lite";
  std::string data_path;
  std::string out_path;
  std::string mask_text = "Aln,GC,SC,PC,SMFE";
  double lr = 0;       // 0 = per-model default
  int batch = 0;       // 0 = per-model default
  long max_epochs = 0;
  int patience = 3;
  double feature_temp = 37.0;
  std::string save_splits_prefix;
  bool verbose = false;
};

int run_train(const GlobalOpts& global, const TrainOpts& opts) {
  Dataset ds = read_csv_file(opts.data_path);
  SplitIndices split = stratified_split(ds, 0.8, 0.1, 0.1, 10, global.seed);
  Dataset train_ds = subset(ds, split.train);
  Dataset val_ds = subset(ds, split.val);
  Dataset test_ds = subset(ds, split.test);
  if (!opts.save_splits_prefix.empty()) {
    write_csv_file(train_ds, opts.save_splits_prefix + "-train.csv");
    write_csv_file(val_ds, opts.save_splits_prefix + "-val.csv");
    write_csv_file(test_ds, opts.save_splits_prefix + "-test.csv");
  }
  const NnParamTable& nn = global.nn();
  const double threshold = 0.2;

  if (opts.model == "cnn" || opts.model == "cnn-lite") {
    ModelGraph model = build_model(opts.model);
    Rng init_rng(global.seed);
    model.init_weights(init_rng);
    TrainConfig cfg;
    cfg.lr = opts.lr > 0 ? opts.lr : 1e-4;
    cfg.batch_size = opts.batch > 0 ? opts.batch : 256;
    cfg.loss = TrainConfig::LossKind::MSE;
    cfg.patience = opts.patience;
    cfg.max_epochs = opts.max_epochs;
    cfg.seed = global.seed;
    cfg.verbose = opts.verbose;
    SampleSet train_set = SampleSet::from_pairs(train_ds);
    SampleSet val_set = SampleSet::from_pairs(val_ds);
    TrainResult result = train_model(model, train_set, val_set, cfg);
    model.save_file(opts.out_path);
    std::printf("epochs=%zu best_epoch=%ld best_val=%.6f params=%zu\n",
                result.history.size(), result.best_epoch, result.best_val,
                model.parameter_count());
    MetricsReport report = eval_pair_model(model, test_ds, test_ds.ref_temp, threshold);
    std::cout << report.table();
    return 0;
  }

  // Feature models.
  FeatureModel fm;
  fm.kind = opts.model;
  fm.mask = FeatureMask::parse(opts.mask_text);
  fm.feature_temp = opts.feature_temp;
  auto train_rows = masked_rows(train_ds, nn, fm.mask, fm.feature_temp);
  fm.standardizer = Standardizer::fit(train_rows);
  fm.standardizer.transform_in_place(train_rows);
  std::vector<Label> train_labels;
  for (const auto& rec : train_ds.records) train_labels.push_back(rec.label);

  if (opts.model == "lda") {
    fm.lda = lda_fit(train_rows, train_labels);
  } else if (opts.model == "qda") {
    fm.qda = qda_fit(train_rows, train_labels);
  } else if (opts.model == "mlp") {
    ModelGraph mlp = build_mlp(static_cast<int>(train_rows[0].size()));
    Rng init_rng(global.seed);
    mlp.init_weights(init_rng);
    TrainConfig cfg;
    cfg.lr = opts.lr > 0 ? opts.lr : 2e-4;
    cfg.batch_size = opts.batch > 0 ? opts.batch : 1024;
    cfg.loss = TrainConfig::LossKind::BCE;
    cfg.patience = opts.patience;
    cfg.max_epochs = opts.max_epochs;
    cfg.seed = global.seed;
    cfg.verbose = opts.verbose;
    std::vector<double> train_targets;
    for (Label l : train_labels) train_targets.push_back(l == Label::High ? 1.0 : 0.0);
    auto val_rows = masked_rows(val_ds, nn, fm.mask, fm.feature_temp);
    fm.standardizer.transform_in_place(val_rows);
    std::vector<double> val_targets;
    for (const auto& rec : val_ds.records) {
      val_targets.push_back(rec.label == Label::High ? 1.0 : 0.0);
    }
    SampleSet train_set = SampleSet::from_features(train_rows, train_targets);
    SampleSet val_set = SampleSet::from_features(val_rows, val_targets);
    TrainResult result = train_model(mlp, train_set, val_set, cfg);
    std::printf("epochs=%zu best_epoch=%ld best_val=%.6f params=%zu\n",
                result.history.size(), result.best_epoch, result.best_val,
                mlp.parameter_count());
    fm.mlp = std::move(mlp);
  } else {
    throw Error(ErrorCode::UsageError, "unknown model '" + opts.model + "'");
  }
  save_feature_model(fm, opts.out_path);
  MetricsReport report = eval_feature_model(fm, test_ds, nn, test_ds.ref_temp, threshold);
  std::cout << report.table();
  return 0;
}

int run_eval(const GlobalOpts& global, const std::string& model_path,
             const std::string& data_path, double eval_temp, double threshold,
             const std::string& record_path) {
  Dataset ds = read_csv_file(data_path);
  const double temp = eval_temp > 0 ? eval_temp : ds.ref_temp;
  LoadedModel model = load_model_file(model_path);
  MetricsReport report =
      model.pair_model
          ? eval_pair_model(*model.pair_model, ds, temp, threshold)
          : eval_feature_model(*model.feature_model, ds, global.nn(), temp, threshold);
  emit_report(report, record_path);
  return 0;
}

int run_predict(const GlobalOpts& global, const std::string& model_path,
                const std::string& data_path, const std::string& out_path,
                double threshold) {
  Dataset ds = read_csv_file(data_path);
  LoadedModel model = load_model_file(model_path);
  std::vector<double> preds(ds.records.size());
  bool probabilistic_cut = false;
  if (model.pair_model) {
    SampleSet set = SampleSet::from_pairs(ds);
    preds = predict(*model.pair_model, set, 512);
  } else {
    FeatureModel& fm = *model.feature_model;
    auto rows = masked_rows(ds, global.nn(), fm.mask, fm.feature_temp);
    fm.standardizer.transform_in_place(rows);
    for (size_t i = 0; i < rows.size(); ++i) preds[i] = fm.score_row(rows[i]);
    probabilistic_cut = !fm.probabilistic();
  }
  std::ofstream out(out_path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + out_path + " for writing");
  }
  out << "s1,s2,prediction,label\n";
  char buf[40];
  const double cut = probabilistic_cut ? 0.0 : threshold;
  for (size_t i = 0; i < preds.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", preds[i]);
    out << ds.records[i].s1.str() << ',' << ds.records[i].s2.str() << ',' << buf << ','
        << label_name(preds[i] >= cut ? Label::High : Label::Low) << '\n';
  }
  std::printf("%zu predictions -> %s\n", preds.size(), out_path.c_str());
  return 0;
}

struct DesignOpts {
  std::string in_path;
  std::string out_path;
  std::string predictor = "thermo";
  std::string model_path;
  int k = 5;
  double threshold = 0.2;
  double temp = 57.0;
  bool prune = false;
  std::string prune_out;
  bool count_only = false;
};

int run_design(const GlobalOpts& global, const DesignOpts& opts) {
  std::vector<FastaRecord> records = read_fasta_file(opts.in_path);
  std::vector<DnaSeq> seqs;
  seqs.reserve(records.size());
  for (const auto& rec : records) seqs.push_back(rec.seq);

  if (opts.count_only) {
    uint64_t kept = 0;
    CandidateSet counters =
        scan_candidates(seqs, opts.k, [&](uint32_t, uint32_t) { ++kept; });
    const double all_pairs =
        0.5 * static_cast<double>(seqs.size()) * static_cast<double>(seqs.size() - 1);
    std::printf("sequences=%zu raw_hits=%llu self_removed=%llu symmetric_removed=%llu "
                "candidates=%llu fraction=%.6f\n",
                seqs.size(), static_cast<unsigned long long>(counters.raw_hits),
                static_cast<unsigned long long>(counters.self_removed),
                static_cast<unsigned long long>(counters.symmetric_removed),
                static_cast<unsigned long long>(kept),
                all_pairs > 0 ? static_cast<double>(kept) / all_pairs : 0.0);
    return 0;
  }

  std::vector<Conflict> conflicts;
  if (opts.predictor == "thermo") {
    YieldOracle oracle(global.nn());
    conflicts = conflict_scan(
        seqs, opts.k,
        [&](const DnaSeq& a, const DnaSeq& b) { return oracle.yield_at(a, b, opts.temp); },
        opts.threshold);
  } else if (opts.predictor == "mlp") {
    LoadedModel model = load_model_file(opts.model_path);
    if (!model.feature_model || model.feature_model->kind != "mlp") {
      throw Error(ErrorCode::UsageError, "--predictor mlp needs an mlp --model-file");
    }
    FeatureModel& fm = *model.feature_model;
    const NnParamTable& nn = global.nn();
    conflicts = conflict_scan(
        seqs, opts.k,
        [&](const DnaSeq& a, const DnaSeq& b) {
          return fm.score_row(fm.features_for(a, b, nn));
        },
        opts.threshold);
  } else if (opts.predictor == "cnn" || opts.predictor == "cnn-lite") {
    LoadedModel model = load_model_file(opts.model_path);
    if (!model.pair_model || model.pair_model->name() != opts.predictor) {
      throw Error(ErrorCode::UsageError,
                  "--predictor " + opts.predictor + " needs a matching --model-file");
    }
    CandidateSet candidates = candidate_pairs(seqs, opts.k);
    Dataset pair_ds;
    pair_ds.records.reserve(candidates.pairs.size());
    for (const auto& [i, j] : candidates.pairs) {
      YieldRecord rec;
      rec.s1 = seqs[i];
      rec.s2 = seqs[j];
      rec.yields.assign(pair_ds.temps.size(), 0.0);
      pair_ds.records.push_back(std::move(rec));
    }
    SampleSet set = SampleSet::from_pairs(pair_ds);
    std::vector<double> preds = predict(*model.pair_model, set, 512);
    for (size_t p = 0; p < preds.size(); ++p) {
      if (preds[p] >= opts.threshold) {
        conflicts.push_back({candidates.pairs[p].first, candidates.pairs[p].second,
                             preds[p]});
      }
    }
    std::sort(conflicts.begin(), conflicts.end(),
              [](const Conflict& a, const Conflict& b) {
                if (a.yield != b.yield) return a.yield > b.yield;
                if (a.id1 != b.id1) return a.id1 < b.id1;
                return a.id2 < b.id2;
              });
  } else {
    throw Error(ErrorCode::UsageError, "unknown predictor '" + opts.predictor + "'");
  }

  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot open " + opts.out_path + " for writing");
    }
    out << "id1,id2,yield\n";
    char buf[40];
    for (const auto& c : conflicts) {
      std::snprintf(buf, sizeof buf, "%.6f", c.yield);
      out << records[c.id1].id << ',' << records[c.id2].id << ',' << buf << '\n';
    }
  }
  std::printf("sequences=%zu conflicts=%zu\n", seqs.size(), conflicts.size());

  if (opts.prune) {
    std::vector<uint32_t> survivors = greedy_prune(seqs.size(), conflicts);
    std::printf("orthogonal subset: %zu of %zu sequences\n", survivors.size(),
                seqs.size());
    if (!opts.prune_out.empty()) {
      std::vector<FastaRecord> kept;
      for (uint32_t id : survivors) kept.push_back(records[id]);
      write_fasta_file(opts.prune_out, kept);
    }
  }
  return 0;
}

struct BenchOpts {
  std::string subject = "cnn-lite";
  std::string data_path;
  std::string model_path;
  int batch = 512;
  int trials = 10;
  double temp = 57.0;
  std::string record_path;
};

int run_bench_cmd(const GlobalOpts& global, const BenchOpts& opts) {
  Dataset ds = read_csv_file(opts.data_path);
  const size_t n = ds.records.size();
  BenchReport report;

  if (opts.subject == "thermo-oracle") {
    // Pre-load: parsed sequences already in memory; the pass covers the full
    // per-pair thermodynamic prediction (energies + equilibrium solve).
    const NnParamTable& nn = global.nn();
    std::vector<double> sink(n);
    auto pass = [&] {
      YieldOracle oracle(nn);
      for (size_t i = 0; i < n; ++i) {
        sink[i] = oracle.yield_at(ds.records[i].s1, ds.records[i].s2, opts.temp);
      }
    };
    report = run_bench(opts.subject, 1, n, pass, opts.trials);
  } else if (opts.subject == "cnn" || opts.subject == "cnn-lite") {
    LoadedModel model = load_model_file(opts.model_path);
    if (!model.pair_model) {
      throw Error(ErrorCode::UsageError, "subject needs a pair-model checkpoint");
    }
    // Pre-load barrier: one-hot bytes staged before timing starts.
    SampleSet set = SampleSet::from_pairs(ds);
    std::vector<double> sink;
    auto pass = [&] { sink = predict(*model.pair_model, set, opts.batch); };
    report = run_bench(opts.subject, opts.batch, n, pass, opts.trials);
  } else if (opts.subject == "mlp" || opts.subject == "lda" || opts.subject == "qda") {
    LoadedModel model = load_model_file(opts.model_path);
    if (!model.feature_model || model.feature_model->kind != opts.subject) {
      throw Error(ErrorCode::UsageError, "subject needs a matching feature model");
    }
    FeatureModel& fm = *model.feature_model;
    // The 9 pre-computations are dataset preparation, not model inference.
    auto rows = masked_rows(ds, global.nn(), fm.mask, fm.feature_temp);
    fm.standardizer.transform_in_place(rows);
    std::vector<double> sink(rows.size());
    std::function<void()> pass;
    if (fm.mlp) {
      SampleSet set = SampleSet::from_features(rows, std::vector<double>(rows.size(), 0.0));
      pass = [&, set = std::move(set)]() mutable {
        sink = predict(*fm.mlp, set, opts.batch);
      };
    } else {
      pass = [&] {
        for (size_t i = 0; i < rows.size(); ++i) sink[i] = fm.score_row(rows[i]);
      };
    }
    report = run_bench(opts.subject, opts.batch, n, pass, opts.trials);
  } else {
    throw Error(ErrorCode::UsageError, "unknown bench subject '" + opts.subject + "'");
  }

  std::cout << report.table();
  if (!opts.record_path.empty()) {
    std::ofstream out(opts.record_path);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot open " + opts.record_path + " for writing");
    }
    out << report.records();
  }
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"hybseq: DNA hybridisation prediction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a key=value config file");

  GlobalOpts global;
  app.add_option("--seed", global.seed, "Seed for every stochastic component");
  app.add_option("--threads", global.threads, "Cap worker threads (0 = hardware)");
  app.add_option("--params", global.params_file,
                 "Thermodynamic parameter file (default: bundled; HYBSEQ_PARAMS)");

  // align
  auto* align_cmd = app.add_subcommand("align", "Semi-global alignment score");
  std::vector<std::string> align_pair;
  bool align_rc = false, align_trace = false;
  AlignParams align_params;
  align_cmd->add_option("--pair", align_pair, "Two sequences")->expected(2)->required();
  align_cmd->add_flag("--rc", align_rc, "Reverse complement the second sequence first");
  align_cmd->add_flag("--trace", align_trace, "Print the aligned rows and cigar");
  align_cmd->add_option("--match", align_params.match);
  align_cmd->add_option("--mismatch", align_params.mismatch);
  align_cmd->add_option("--gap-open", align_params.gap_open);
  align_cmd->add_option("--gap-extend", align_params.gap_extend);

  // thermo
  auto* thermo_cmd = app.add_subcommand("thermo", "Two-strand equilibrium yield");
  std::vector<std::string> thermo_pair;
  double thermo_temp = 57.0;
  thermo_cmd->add_option("--pair", thermo_pair, "Two sequences")->expected(2)->required();
  thermo_cmd->add_option("--temp", thermo_temp, "Temperature in Celsius");

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Synthetic hybridisation dataset");
  DatasetConfig gen_cfg;
  std::string gen_out;
  gen_cmd->add_option("--out", gen_out, "Output pairs CSV")->required();
  gen_cmd->add_option("--n-roots", gen_cfg.n_roots, "Root sequences per round");
  gen_cmd->add_option("--target", gen_cfg.target_size, "Target pair count");
  gen_cmd->add_option("--minor-root", gen_cfg.minor_root_count);
  gen_cmd->add_option("--minor-rc", gen_cfg.minor_rc_count);
  gen_cmd->add_option("--severe-root", gen_cfg.severe_root_count);
  gen_cmd->add_option("--severe-rc", gen_cfg.severe_rc_count);
  gen_cmd->add_option("--severe-max", gen_cfg.severe_count_max,
                      "Upper bound on severe edit counts");
  gen_cmd->add_option("--max-rounds", gen_cfg.max_rounds);

  // features
  auto* feat_cmd = app.add_subcommand("features", "Extract the 9 per-pair features");
  std::string feat_in, feat_out;
  double feat_temp = 37.0;
  feat_cmd->add_option("--in", feat_in, "Pairs CSV")->required();
  feat_cmd->add_option("--out", feat_out, "Feature CSV")->required();
  feat_cmd->add_option("--temp", feat_temp, "Single-strand tube temperature");

  // train
  auto* train_cmd = app.add_subcommand("train", "Fit a predictor on a pairs CSV");
  TrainOpts train_opts;
  train_cmd->add_option("--model", train_opts.model, "cnn|cnn-lite|mlp|lda|qda")
      ->required();
  train_cmd->add_option("--data", train_opts.data_path, "Pairs CSV")->required();
  train_cmd->add_option("--out", train_opts.out_path, "Model file")->required();
  train_cmd->add_option("--mask", train_opts.mask_text, "Feature groups for lda/qda/mlp");
  train_cmd->add_option("--lr", train_opts.lr, "Learning rate (0 = model default)");
  train_cmd->add_option("--batch", train_opts.batch, "Batch size (0 = model default)");
  train_cmd->add_option("--epochs", train_opts.max_epochs, "Epoch cap (0 = unbounded)");
  train_cmd->add_option("--patience", train_opts.patience, "Early-stopping patience");
  train_cmd->add_option("--features-temp", train_opts.feature_temp);
  train_cmd->add_option("--save-splits", train_opts.save_splits_prefix,
                        "Write <prefix>-{train,val,test}.csv");
  train_cmd->add_flag("--verbose", train_opts.verbose, "Per-epoch losses on stderr");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Metrics report against stored labels");
  std::string eval_model, eval_data, eval_record;
  double eval_temp = 0.0, eval_threshold = 0.2;
  eval_cmd->add_option("--model-file", eval_model)->required();
  eval_cmd->add_option("--data", eval_data, "Pairs CSV")->required();
  eval_cmd->add_option("--eval-temp", eval_temp,
                       "Label temperature (default: dataset reference)");
  eval_cmd->add_option("--threshold", eval_threshold, "Yield binarisation threshold");
  eval_cmd->add_option("--record", eval_record, "Also write name=value records here");

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "Per-pair predictions to CSV");
  std::string pred_model, pred_data, pred_out;
  double pred_threshold = 0.2;
  pred_cmd->add_option("--model-file", pred_model)->required();
  pred_cmd->add_option("--data", pred_data, "Pairs CSV")->required();
  pred_cmd->add_option("--out", pred_out, "Predictions CSV")->required();
  pred_cmd->add_option("--threshold", pred_threshold);

  // design
  auto* design_cmd = app.add_subcommand("design", "Orthogonal library workflow");
  DesignOpts design_opts;
  design_cmd->add_option("--in", design_opts.in_path, "Library FASTA")->required();
  design_cmd->add_option("--k", design_opts.k, "Minimum shared substring length");
  design_cmd->add_option("--predictor", design_opts.predictor,
                         "thermo|cnn|cnn-lite|mlp");
  design_cmd->add_option("--model-file", design_opts.model_path);
  design_cmd->add_option("--threshold", design_opts.threshold);
  design_cmd->add_option("--temp", design_opts.temp, "Thermo predictor temperature");
  design_cmd->add_option("--out", design_opts.out_path, "Conflicts CSV");
  design_cmd->add_flag("--prune", design_opts.prune, "Greedy conflict pruning");
  design_cmd->add_option("--prune-out", design_opts.prune_out, "Surviving FASTA");
  design_cmd->add_flag("--count-only", design_opts.count_only,
                       "Stream and report candidate counts without predictions");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Inference timing (warm-up + trials)");
  BenchOpts bench_opts;
  bench_cmd->add_option("--subject", bench_opts.subject,
                        "thermo-oracle|cnn|cnn-lite|mlp|lda|qda")
      ->required();
  bench_cmd->add_option("--data", bench_opts.data_path, "Pairs CSV")->required();
  bench_cmd->add_option("--model-file", bench_opts.model_path);
  bench_cmd->add_option("--batch", bench_opts.batch);
  bench_cmd->add_option("--trials", bench_opts.trials);
  bench_cmd->add_option("--temp", bench_opts.temp);
  bench_cmd->add_option("--record", bench_opts.record_path);

  std::vector<const char*> argv;
  argv.push_back("hybseq");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  set_thread_cap(global.threads);
  try {
    if (*align_cmd) {
      return run_align(align_pair[0], align_pair[1], align_rc, align_trace, align_params);
    }
    if (*thermo_cmd) return run_thermo(global, thermo_pair[0], thermo_pair[1], thermo_temp);
    if (*gen_cmd) return run_generate(global, gen_cfg, gen_out);
    if (*feat_cmd) return run_features(global, feat_in, feat_out, feat_temp);
    if (*train_cmd) return run_train(global, train_opts);
    if (*eval_cmd) {
      return run_eval(global, eval_model, eval_data, eval_temp, eval_threshold,
                      eval_record);
    }
    if (*pred_cmd) {
      return run_predict(global, pred_model, pred_data, pred_out, pred_threshold);
    }
    if (*design_cmd) return run_design(global, design_opts);
    if (*bench_cmd) return run_bench_cmd(global, bench_opts);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace hybseq
