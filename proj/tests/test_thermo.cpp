#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hybseq/dataset.hpp"
#include "hybseq/thermo.hpp"

using namespace hybseq;

namespace {

DnaSeq seq(const char* s) { return DnaSeq::parse(s); }

// Independent spreadsheet-style sum for a perfect Watson-Crick duplex:
// initiation + every stack along the strand + AT-terminal ends.
StackParams hand_duplex_sum(const std::string& s, const NnParamTable& nn) {
  StackParams total = nn.init;
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    const StackParams& sp = nn.stack(s[i], s[i + 1]);
    total.dh += sp.dh;
    total.ds += sp.ds;
  }
  for (char end : {s.front(), s.back()}) {
    if (end == 'A' || end == 'T') {
      total.dh += nn.terminal_at.dh;
      total.ds += nn.terminal_at.ds;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("parameter table serialization and checksum") {
  const NnParamTable& nn = NnParamTable::defaults();
  const std::string text = nn.serialize();
  CHECK(text.find("checksum") != std::string::npos);
  NnParamTable back = NnParamTable::parse_text(text);
  CHECK(back == nn);

  // rc-equivalent steps share the entry.
  CHECK(nn.stack('T', 'T').dh == nn.stack('A', 'A').dh);
  CHECK(nn.stack('T', 'G').dh == nn.stack('C', 'A').dh);

  SUBCASE("tampered checksum is rejected") {
    std::string bad = text;
    bad.replace(bad.find("checksum ") + 9, 1, "0");
    bad.replace(bad.find("checksum ") + 10, 1, "0");
    CHECK_THROWS_AS(NnParamTable::parse_text(bad), Error);
  }
  SUBCASE("missing stack is rejected") {
    CHECK_THROWS_AS(NnParamTable::parse_text("stack AA -7.9 -22.2\ninit 0.2 -5.7\n"
                                             "terminal_at 2.2 6.9\n"),
                    Error);
  }
  SUBCASE("positive stack enthalpy is rejected") {
    std::string flipped = "stack AA 7.9 -22.2\n";
    CHECK_THROWS_AS(NnParamTable::parse_text(flipped), Error);
  }
}

TEST_CASE("duplex energy of a perfect complement matches the hand sum") {
  const NnParamTable& nn = NnParamTable::defaults();
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    DnaSeq s = random_seq(20, rng);
    DuplexEnergy e = duplex_energy(s, reverse_complement(s), AlignParams{}, nn);
    REQUIRE(e.bound);
    StackParams expect = hand_duplex_sum(s.str(), nn);
    CHECK(e.dh == doctest::Approx(expect.dh).epsilon(1e-12));
    CHECK(e.ds == doctest::Approx(expect.ds).epsilon(1e-12));
    // Stronger binding as temperature drops.
    CHECK(e.dg(37.0) < e.dg(57.0));
  }
}

TEST_CASE("duplex energy is symmetric and flags unbound pairs") {
  const NnParamTable& nn = NnParamTable::defaults();
  const AlignParams p;

  DuplexEnergy none = duplex_energy(seq("AAAAAAAAAAAAAAAAAA"), seq("GGGGGGGGGGGGGGGGGG"),
                                    p, nn);
  CHECK_FALSE(none.bound);
  CHECK(none.assoc_const(57.0) == 0.0);

  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    DnaSeq a = random_seq(rng.range(18, 26), rng);
    DnaSeq b = random_seq(rng.range(18, 26), rng);
    DuplexEnergy ab = duplex_energy(a, b, p, nn);
    DuplexEnergy ba = duplex_energy(b, a, p, nn);
    CHECK(ab.bound == ba.bound);
    CHECK(ab.dh == ba.dh);
    CHECK(ab.ds == ba.ds);
  }
}

TEST_CASE("single structure score") {
  CHECK(single_structure_score(seq("AAAAAAAA")) == 0.0);
  CHECK(single_structure_score(seq("GGGAAACCC")) == -3.0);
  CHECK_THROWS_AS(single_structure_score(seq("ACGTACG")), Error);

  // Fig-2-style contrast: the self-complementary sequence folds lower.
  CHECK(single_structure_score(seq("TTTCGCACGGACGAGGACGTCCGTTA")) <
        single_structure_score(seq("AGTACAAGTAGGACAGGAAGATA")));
}

TEST_CASE("equilibrate") {
  SUBCASE("all constants zero leaves the strands free") {
    TubeState st = equilibrate(TubeSpec{});
    CHECK(st.a == 1e-6);
    CHECK(st.b == 1e-6);
    CHECK(st.yield == 0.0);
  }

  SUBCASE("closed-form quadratic case") {
    TubeSpec spec;
    spec.k_ab = 1e6;
    TubeState st = equilibrate(spec);
    CHECK(st.a == doctest::Approx(6.18034e-7).epsilon(1e-5));
    CHECK(st.b == doctest::Approx(6.18034e-7).epsilon(1e-5));
    CHECK(st.c_ab == doctest::Approx(3.81966e-7).epsilon(1e-5));
    CHECK(st.yield == doctest::Approx(0.3819660).epsilon(1e-6));
  }

  SUBCASE("saturating association drives yield to 1") {
    TubeSpec spec;
    spec.k_ab = 1e18;
    TubeState st = equilibrate(spec);
    CHECK(st.yield >= 1.0 - 1e-6);
    CHECK(st.yield <= 1.0);
  }

  SUBCASE("matches the closed form whenever exactly one K is nonzero") {
    Rng rng(19);
    for (int trial = 0; trial < 300; ++trial) {
      const double a0 = std::pow(10.0, rng.uniform(-8, -4));
      const double b0 = std::pow(10.0, rng.uniform(-8, -4));
      const double k = std::pow(10.0, rng.uniform(0, 12));
      // Heterodimer only: a solves K a (a - (a0 - b0)) style quadratic; check
      // via the AA-only and AB-only closed forms.
      TubeSpec aa;
      aa.a0 = a0, aa.b0 = b0;
      aa.k_aa = k;
      TubeState st = equilibrate(aa);
      const double closed = 2.0 * a0 / (1.0 + std::sqrt(1.0 + 8.0 * k * a0));
      CHECK(st.a == doctest::Approx(closed).epsilon(1e-12));
      CHECK(st.b == doctest::Approx(b0).epsilon(1e-12));
    }
  }

  SUBCASE("mass balance holds to 1e-9 relative over random tubes") {
    Rng rng(4);
    for (int trial = 0; trial < 10000; ++trial) {
      TubeSpec spec;
      spec.a0 = std::pow(10.0, rng.uniform(-8, -4));
      spec.b0 = std::pow(10.0, rng.uniform(-8, -4));
      spec.k_aa = rng.bernoulli(0.2) ? 0.0 : std::pow(10.0, rng.uniform(-3, 15));
      spec.k_bb = rng.bernoulli(0.2) ? 0.0 : std::pow(10.0, rng.uniform(-3, 15));
      spec.k_ab = rng.bernoulli(0.2) ? 0.0 : std::pow(10.0, rng.uniform(-3, 15));
      TubeState st = equilibrate(spec);
      const double res_a = std::abs(st.a + 2 * st.c_aa + st.c_ab - spec.a0);
      const double res_b = std::abs(st.b + 2 * st.c_bb + st.c_ab - spec.b0);
      CHECK(res_a <= 1e-9 * spec.a0);
      CHECK(res_b <= 1e-9 * spec.b0);
      CHECK(st.a >= 0.0);
      CHECK(st.yield >= 0.0);
      CHECK(st.yield <= 1.0);
    }
  }

  CHECK_THROWS_AS(equilibrate(TubeSpec{-1e-6, 1e-6, 57, 0, 0, 0}), Error);
  CHECK_THROWS_AS(equilibrate(TubeSpec{1e-6, 1e-6, 57, -5, 0, 0}), Error);
}

TEST_CASE("pair yield") {
  const NnParamTable& nn = NnParamTable::defaults();
  Rng rng(6);

  SUBCASE("perfect 20-mer complements bind almost completely at 37 C") {
    for (int trial = 0; trial < 25; ++trial) {
      DnaSeq s = random_seq(20, rng);
      CHECK(pair_yield(s, reverse_complement(s), 37.0, nn) >= 0.99);
    }
  }

  SUBCASE("random unrelated 20-mers stay essentially unbound") {
    // A few per thousand share a long complementary substring by chance and
    // genuinely bind part-way; the bulk must sit at zero.
    int above = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      DnaSeq a = random_seq(20, rng), b = random_seq(20, rng);
      const double y = pair_yield(a, b, 57.0, nn);
      above += (y > 0.01);
      worst = std::max(worst, y);
    }
    CHECK(above <= 5);
    CHECK(worst < 0.5);
  }

  SUBCASE("self-complementary sequence is homodimer-dominant at 37 C") {
    DnaSeq s = seq("CCATGGAGGCGCGCCTTT");
    const double k_aa = duplex_energy(s, s, AlignParams{}, nn).assoc_const(37.0);
    TubeSpec spec;
    spec.k_aa = k_aa;
    // Single-sequence tube: only {A, AA}; reuse the solver with K_AB = 0 and
    // an inert partner.
    spec.k_ab = 0.0;
    spec.k_bb = 0.0;
    TubeState st = equilibrate(spec);
    CHECK(st.c_aa > st.a);
  }

  CHECK_THROWS_AS(pair_yield(seq("ACGTACGTACGTACGTAC"), seq("ACGTACGTACGTACGTAC"),
                             120.0, nn),
                  Error);
}

TEST_CASE("yield profile") {
  const NnParamTable& nn = NnParamTable::defaults();
  Rng rng(14);
  const std::vector<double>& temps = canonical_temps();

  SUBCASE("perfect complements cool monotonically") {
    for (int trial = 0; trial < 10; ++trial) {
      DnaSeq s = random_seq(20, rng);
      auto profile = yield_profile(s, reverse_complement(s), temps, nn);
      REQUIRE(profile.size() == temps.size());
      for (size_t i = 1; i < profile.size(); ++i) {
        CHECK(profile[i] <= profile[i - 1] + 1e-12);
      }
    }
  }

  SUBCASE("unbound pairs give the zero vector") {
    auto profile = yield_profile(seq("AAAAAAAAAAAAAAAAAA"), seq("GGGGGGGGGGGGGGGGGG"),
                                 temps, nn);
    for (double y : profile) CHECK(y == 0.0);
  }

  SUBCASE("elementwise symmetric") {
    for (int trial = 0; trial < 50; ++trial) {
      DnaSeq a = random_seq(rng.range(18, 26), rng);
      DnaSeq b = random_seq(rng.range(18, 26), rng);
      CHECK(yield_profile(a, b, temps, nn) == yield_profile(b, a, temps, nn));
    }
  }

  CHECK_THROWS_AS(yield_profile(seq("ACGTACGTACGTACGTAC"), seq("ACGTACGTACGTACGTAC"),
                                {}, nn),
                  Error);
}

TEST_CASE("temperature similarity matrices") {
  const std::vector<double> temps = {37, 42};

  SUBCASE("identical columns are zero everywhere") {
    std::vector<std::vector<double>> yields = {{0.5, 0.5}, {0.2, 0.2}};
    TempSimilarity sim = temp_similarity(yields, temps);
    for (double v : sim.mae) CHECK(v == 0.0);
    for (double v : sim.mse) CHECK(v == 0.0);
  }

  SUBCASE("symmetric with zero diagonal") {
    std::vector<std::vector<double>> yields = {{0.9, 0.1}, {0.4, 0.3}, {1.0, 0.0}};
    TempSimilarity sim = temp_similarity(yields, temps);
    CHECK(sim.mae_at(0, 0) == 0.0);
    CHECK(sim.mae_at(1, 1) == 0.0);
    CHECK(sim.mae_at(0, 1) == sim.mae_at(1, 0));
    CHECK(sim.mae_at(0, 1) == doctest::Approx((0.8 + 0.1 + 1.0) / 3.0));
    CHECK(sim.mse_at(0, 1) == doctest::Approx((0.64 + 0.01 + 1.0) / 3.0));
  }
}
