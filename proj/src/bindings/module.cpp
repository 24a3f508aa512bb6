#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hybseq/design.hpp"
#include "hybseq/discriminant.hpp"
#include "hybseq/features.hpp"
#include "hybseq/metrics.hpp"
#include "hybseq/train.hpp"

namespace py = pybind11;
using namespace hybseq;

namespace {

// Sequences cross the boundary as plain strings; validation happens on entry.
DnaSeq parse_seq(const std::string& text) { return DnaSeq::parse(text); }

std::vector<Label> to_labels(const std::vector<int>& raw) {
  std::vector<Label> out;
  out.reserve(raw.size());
  for (int v : raw) out.push_back(v ? Label::High : Label::Low);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DNA hybridisation prediction toolkit (C++ core)";

  py::register_exception<Error>(m, "HybseqError");

  // seq
  m.def("parse", [](const std::string& s) { return parse_seq(s).str(); },
        "Validate and normalize a DNA sequence");
  m.def("reverse_complement",
        [](const std::string& s) { return reverse_complement(parse_seq(s)).str(); });
  m.def("gc_content", [](const std::string& s) { return gc_content(parse_seq(s)); });
  m.def("random_seq",
        [](int len, uint64_t seed) {
          Rng rng(seed);
          return random_seq(len, rng).str();
        },
        py::arg("len"), py::arg("seed") = 0);
  m.def("one_hot_pair",
        [](const std::string& s1, const std::string& s2, int n_max) {
          OneHotPair p = one_hot_pair(parse_seq(s1), parse_seq(s2), n_max);
          return py::make_tuple(std::vector<int>{2, 4, p.n_max}, p.grid);
        },
        py::arg("s1"), py::arg("s2"), py::arg("n_max") = 26,
        "Returns (shape, flat row-major grid)");

  // align
  m.def("semi_global_score", [](const std::string& a, const std::string& b) {
    return semi_global_score(parse_seq(a), parse_seq(b));
  });
  m.def("annealing_score", [](const std::string& a, const std::string& b) {
    return annealing_score(parse_seq(a), parse_seq(b));
  });
  m.def("semi_global_trace", [](const std::string& a, const std::string& b) {
    AlignResult r = semi_global_trace(parse_seq(a), parse_seq(b));
    return py::make_tuple(r.score, r.aligned_a, r.aligned_b, r.cigar);
  });

  // thermo
  py::class_<TubeSpec>(m, "TubeSpec")
      .def(py::init<>())
      .def_readwrite("a0", &TubeSpec::a0)
      .def_readwrite("b0", &TubeSpec::b0)
      .def_readwrite("temp_c", &TubeSpec::temp_c)
      .def_readwrite("k_aa", &TubeSpec::k_aa)
      .def_readwrite("k_bb", &TubeSpec::k_bb)
      .def_readwrite("k_ab", &TubeSpec::k_ab);
  py::class_<TubeState>(m, "TubeState")
      .def_readonly("a", &TubeState::a)
      .def_readonly("b", &TubeState::b)
      .def_readonly("c_aa", &TubeState::c_aa)
      .def_readonly("c_bb", &TubeState::c_bb)
      .def_readonly("c_ab", &TubeState::c_ab)
      .def_readonly("yield_ab", &TubeState::yield);
  m.def("equilibrate", &equilibrate);
  m.def("pair_yield",
        [](const std::string& s1, const std::string& s2, double temp_c) {
          return pair_yield(parse_seq(s1), parse_seq(s2), temp_c,
                            NnParamTable::defaults());
        },
        py::arg("s1"), py::arg("s2"), py::arg("temp_c") = 57.0);
  m.def("yield_profile",
        [](const std::string& s1, const std::string& s2,
           const std::vector<double>& temps) {
          return yield_profile(parse_seq(s1), parse_seq(s2), temps,
                               NnParamTable::defaults());
        },
        py::arg("s1"), py::arg("s2"),
        py::arg("temps") = std::vector<double>{37, 42, 47, 52, 57, 62});
  m.def("single_structure_score",
        [](const std::string& s) { return single_structure_score(parse_seq(s)); });

  // features
  m.def("extract_features",
        [](const std::string& s1, const std::string& s2, double temp_c) {
          FeatureVector f =
              extract(parse_seq(s1), parse_seq(s2), NnParamTable::defaults(), {}, temp_c);
          return std::vector<double>(f.v.begin(), f.v.end());
        },
        py::arg("s1"), py::arg("s2"), py::arg("temp_c") = 37.0);

  // dataset
  m.def("generate_dataset",
        [](uint64_t seed, size_t target_size, int n_roots, const std::string& csv_path) {
          DatasetConfig cfg;
          cfg.seed = seed;
          cfg.target_size = target_size;
          cfg.n_roots = n_roots;
          YieldOracle oracle(NnParamTable::defaults());
          GenerateResult result = generate(cfg, [&](const DnaSeq& a, const DnaSeq& b) {
            return oracle.profile(a, b, cfg.temps);
          });
          if (!csv_path.empty()) write_csv_file(result.dataset, csv_path);
          return py::make_tuple(result.dataset.records.size(), result.warnings);
        },
        py::arg("seed"), py::arg("target_size") = 1000, py::arg("n_roots") = 50,
        py::arg("csv_path") = "");
  m.def("label_yield",
        [](double y, double threshold) {
          return label_yield(y, threshold) == Label::High ? 1 : 0;
        },
        py::arg("yield_value"), py::arg("threshold") = 0.2);

  // metrics
  m.def("mcc", [](long tp, long fp, long tn, long fn) { return mcc(tp, fp, tn, fn); });
  m.def("auroc", [](const std::vector<double>& scores, const std::vector<int>& labels) {
    return auroc(scores, to_labels(labels));
  });
  m.def("permutation_test",
        [](const std::vector<int>& a, const std::vector<int>& b, int iters,
           uint64_t seed) { return permutation_test(a, b, iters, seed); },
        py::arg("correct_a"), py::arg("correct_b"), py::arg("iters") = 5000,
        py::arg("seed") = 0);

  // baseline classifiers over feature rows
  py::class_<LdaModel>(m, "LdaModel");
  m.def("lda_fit", [](const FeatureMatrix& x, const std::vector<int>& y) {
    return lda_fit(x, to_labels(y));
  });
  m.def("lda_score", [](const LdaModel& model, const std::vector<double>& x) {
    return lda_score(model, x);
  });
  py::class_<QdaModel>(m, "QdaModel");
  m.def("qda_fit", [](const FeatureMatrix& x, const std::vector<int>& y) {
    return qda_fit(x, to_labels(y));
  });
  m.def("qda_score", [](const QdaModel& model, const std::vector<double>& x) {
    return qda_score(model, x);
  });

  // neural
  py::class_<ModelGraph>(m, "ModelGraph")
      .def_property_readonly("name", &ModelGraph::name)
      .def_property_readonly("parameter_count", &ModelGraph::parameter_count)
      .def("save", &ModelGraph::save_file)
      .def_static("load", &ModelGraph::load_file)
      .def("predict_pairs",
           [](ModelGraph& g,
              const std::vector<std::pair<std::string, std::string>>& pairs, int batch) {
             Dataset ds;
             for (const auto& [a, b] : pairs) {
               YieldRecord rec;
               rec.s1 = parse_seq(a);
               rec.s2 = parse_seq(b);
               rec.yields.assign(ds.temps.size(), 0.0);
               ds.records.push_back(std::move(rec));
             }
             return predict(g, SampleSet::from_pairs(ds), batch);
           },
           py::arg("pairs"), py::arg("batch") = 256);
  m.def("build_cnn", &build_cnn);
  m.def("build_cnn_lite", &build_cnn_lite);
  m.def("build_mlp", &build_mlp, py::arg("input_dim") = 9);

  // libdesign
  m.def("brute_lcs", [](const std::string& a, const std::string& b) {
    return brute_lcs(parse_seq(a), parse_seq(b));
  });
  m.def("candidate_pairs",
        [](const std::vector<std::string>& seqs, int k) {
          std::vector<DnaSeq> parsed;
          parsed.reserve(seqs.size());
          for (const auto& s : seqs) parsed.push_back(parse_seq(s));
          CandidateSet set = candidate_pairs(parsed, k);
          return py::make_tuple(set.pairs, set.raw_hits, set.self_removed,
                                set.symmetric_removed);
        },
        py::arg("seqs"), py::arg("k") = 5);
  m.def("conflict_scan",
        [](const std::vector<std::string>& seqs, int k, double threshold, double temp_c) {
          std::vector<DnaSeq> parsed;
          parsed.reserve(seqs.size());
          for (const auto& s : seqs) parsed.push_back(parse_seq(s));
          YieldOracle oracle(NnParamTable::defaults());
          auto conflicts = conflict_scan(
              parsed, k,
              [&](const DnaSeq& a, const DnaSeq& b) {
                return oracle.yield_at(a, b, temp_c);
              },
              threshold);
          std::vector<std::tuple<uint32_t, uint32_t, double>> out;
          for (const auto& c : conflicts) out.emplace_back(c.id1, c.id2, c.yield);
          return out;
        },
        py::arg("seqs"), py::arg("k") = 5, py::arg("threshold") = 0.2,
        py::arg("temp_c") = 57.0);
}
