#include <sstream>

#include "doctest.h"
#include "hybseq/features.hpp"

using namespace hybseq;

TEST_CASE("extract") {
  const NnParamTable& nn = NnParamTable::defaults();
  Rng rng(12);

  SUBCASE("perfect 26-mer complement scores 130 on f0") {
    DnaSeq s = DnaSeq::parse("GAATACTGTCAGTGAGAGGATCTGCC");
    FeatureVector f = extract(s, reverse_complement(s), nn);
    CHECK(f[0] == 130.0);
  }

  SUBCASE("single-strand mass balance holds at 1 uM") {
    for (int trial = 0; trial < 50; ++trial) {
      DnaSeq a = random_seq(rng.range(18, 26), rng);
      DnaSeq b = random_seq(rng.range(18, 26), rng);
      FeatureVector f = extract(a, b, nn);
      CHECK(f[5] + 2.0 * f[7] == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(f[6] + 2.0 * f[8] == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(f[1] >= 0.0);
      CHECK(f[1] <= 1.0);
      CHECK(f[5] >= 0.0);
      CHECK(f[7] >= 0.0);
    }
  }

  SUBCASE("self-complementary strand is homodimer-dominant") {
    DnaSeq s = DnaSeq::parse("CCATGGAGGCGCGCCTTT");
    FeatureVector f = extract(s, s, nn);
    CHECK(f[7] > f[5]);
  }

  SUBCASE("swapping the pair swaps the per-sequence columns") {
    for (int trial = 0; trial < 50; ++trial) {
      DnaSeq a = random_seq(rng.range(18, 26), rng);
      DnaSeq b = random_seq(rng.range(18, 26), rng);
      FeatureVector ab = extract(a, b, nn);
      FeatureVector ba = extract(b, a, nn);
      CHECK(ab[0] == ba[0]);
      CHECK(ab[1] == ba[2]);
      CHECK(ab[2] == ba[1]);
      CHECK(ab[3] == ba[4]);
      CHECK(ab[4] == ba[3]);
      CHECK(ab[5] == ba[6]);
      CHECK(ab[6] == ba[5]);
      CHECK(ab[7] == ba[8]);
      CHECK(ab[8] == ba[7]);
    }
  }
}

TEST_CASE("feature masks") {
  FeatureVector f;
  for (int c = 0; c < kFeatureCount; ++c) f.v[c] = c * 10.0;

  CHECK(apply_mask(f, FeatureMask::of({FeatureGroup::Aln})) ==
        std::vector<double>{0.0});
  CHECK(apply_mask(f, FeatureMask::all()).size() == 9);
  CHECK(apply_mask(f, FeatureMask::all()) ==
        std::vector<double>{0, 10, 20, 30, 40, 50, 60, 70, 80});

  // Alignment-free configuration drops only f0.
  auto alignment_free = apply_mask(
      f, FeatureMask::of({FeatureGroup::GC, FeatureGroup::SC, FeatureGroup::PC,
                          FeatureGroup::SMFE}));
  CHECK(alignment_free == std::vector<double>{10, 20, 30, 40, 50, 60, 70, 80});

  CHECK_THROWS_AS(apply_mask(f, FeatureMask{}), Error);

  CHECK(FeatureMask::parse("Aln,GC").str() == "Aln,GC");
  CHECK(FeatureMask::parse("smfe").columns() == std::vector<int>{3, 4});
  CHECK_THROWS_AS(FeatureMask::parse("bogus"), Error);
}

TEST_CASE("standardizer") {
  std::vector<std::vector<double>> rows = {
      {1.0, 5.0, 7.0}, {3.0, 5.0, 9.0}, {5.0, 5.0, 14.0}, {7.0, 5.0, 18.0}};
  Standardizer s = Standardizer::fit(rows);

  SUBCASE("training columns become zero mean unit variance") {
    std::vector<std::vector<double>> z = rows;
    s.transform_in_place(z);
    for (size_t c = 0; c < 3; ++c) {
      double mean = 0, var = 0;
      for (const auto& row : z) mean += row[c];
      mean /= z.size();
      for (const auto& row : z) var += (row[c] - mean) * (row[c] - mean);
      var /= z.size();
      CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
      if (c != 1) CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("constant columns turn into zeros") {
    auto z = s.transform({2.0, 5.0, 11.0});
    CHECK(z[1] == 0.0);
  }

  SUBCASE("transform is affine") {
    std::vector<double> x = {2.0, 6.0, 8.0}, y = {6.0, 4.0, 16.0};
    const double alpha = 0.3;
    std::vector<double> mix(3), want(3);
    auto zx = s.transform(x), zy = s.transform(y);
    for (size_t c = 0; c < 3; ++c) {
      mix[c] = alpha * x[c] + (1 - alpha) * y[c];
      want[c] = alpha * zx[c] + (1 - alpha) * zy[c];
    }
    auto got = s.transform(mix);
    for (size_t c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(want[c]));
  }

  CHECK_THROWS_AS(Standardizer::fit({{1.0}}), Error);
}

TEST_CASE("feature csv round trip") {
  const NnParamTable& nn = NnParamTable::defaults();
  Dataset ds;
  Rng rng(33);
  for (int i = 0; i < 20; ++i) {
    YieldRecord rec;
    rec.s1 = random_seq(20, rng);
    rec.s2 = random_seq(22, rng);
    rec.yields = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    rec.label = Label::High;
    ds.records.push_back(rec);
  }
  FeatureTable table = extract_table(ds, nn);
  REQUIRE(table.features.size() == 20);
  CHECK(table.ref_yields[0] == 0.5);

  std::ostringstream out;
  write_features_csv(table, out);
  CHECK(out.str().rfind("s1,s2,f0,f1,f2,f3,f4,f5,f6,f7,f8,y57,label", 0) == 0);
  std::istringstream in(out.str());
  FeatureTable back = read_features_csv(in);
  REQUIRE(back.features.size() == 20);
  for (size_t i = 0; i < 20; ++i) {
    for (int c = 0; c < kFeatureCount; ++c) {
      CHECK(back.features[i].v[c] ==
            doctest::Approx(table.features[i].v[c]).epsilon(1e-8));
    }
    CHECK(back.records[i].label == table.records[i].label);
  }

  std::istringstream bad("s1,s2,f0,label\nACGT,ACGT,1,Low\n");
  CHECK_THROWS_AS(read_features_csv(bad), Error);
}
