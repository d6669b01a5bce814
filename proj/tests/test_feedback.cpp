#include <doctest.h>

#include <cmath>

#include "panelcp/feedback.hpp"
#include "panelcp/rng.hpp"

using namespace panelcp;

TEST_CASE("mcar schedules") {
  SUBCASE("endpoints") {
    const auto ones = mcar_schedule(1.0, 50, 3);
    const auto zeros = mcar_schedule(0.0, 50, 3);
    for (int t = 0; t < 50; ++t) {
      CHECK(ones.revealed(t));
      CHECK_FALSE(zeros.revealed(t));
    }
  }
  SUBCASE("empirical rate concentrates") {
    const auto s = mcar_schedule(0.5, 10000, 11);
    double mean = 0.0;
    for (int t = 0; t < 10000; ++t) mean += s.revealed(t);
    mean /= 10000.0;
    CHECK(std::abs(mean - 0.5) < 0.02);
  }
  SUBCASE("determinism and p validation") {
    const auto a = mcar_schedule(0.3, 100, 7);
    const auto b = mcar_schedule(0.3, 100, 7);
    CHECK(a.reveals == b.reveals);
    CHECK_THROWS(mcar_schedule(-0.1, 10, 1));
    CHECK_THROWS(mcar_schedule(1.1, 10, 1));
  }
  SUBCASE("shared uniforms couple the p-sweep monotonically") {
    const auto u = mcar_uniforms(500, 99);
    const auto lo = mcar_from_uniforms(0.2, u, 99);
    const auto hi = mcar_from_uniforms(0.7, u, 99);
    for (int t = 0; t < 500; ++t)
      if (lo.revealed(t)) CHECK(hi.revealed(t));
  }
}

TEST_CASE("centered rank scores") {
  SUBCASE("strictly increasing input hits the endpoints") {
    const auto z = rank_to_z(std::vector<double>{1.0, 5.0, 9.0});
    CHECK(z[0] == doctest::Approx(-1.0));
    CHECK(z[1] == doctest::Approx(0.0));
    CHECK(z[2] == doctest::Approx(1.0));
  }
  SUBCASE("ties take the average rank") {
    const auto z = rank_to_z(std::vector<double>{2.0, 2.0, 2.0});
    for (double v : z) CHECK(v == doctest::Approx(0.0));
  }
  SUBCASE("single value maps to zero") {
    CHECK(rank_to_z(std::vector<double>{42.0})[0] == 0.0);
  }
  SUBCASE("random input: monotone in rank, mean zero") {
    Rng rng(4, 4);
    std::vector<double> vals(101);
    for (auto& v : vals) v = rng.uniform(-5, 5);
    const auto z = rank_to_z(vals);
    double mean = 0.0;
    for (double v : z) mean += v;
    CHECK(std::abs(mean / 101.0) < 1e-12);
    for (std::size_t i = 0; i < vals.size(); ++i)
      for (std::size_t j = 0; j < vals.size(); ++j)
        if (vals[i] < vals[j]) REQUIRE(z[i] < z[j]);
  }
}

TEST_CASE("informative mechanism") {
  Rng rng(5, 5);
  std::vector<double> difficulties(200);
  for (auto& v : difficulties) v = rng.uniform(0, 3);

  SUBCASE("propensities follow the logistic map of the rank score") {
    const auto hard = informative_schedule(difficulties, RevealDirection::hard_visible, 1);
    const auto z = rank_to_z(difficulties);
    for (std::size_t t = 0; t < z.size(); ++t)
      CHECK(hard.probs[t] ==
            doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * z[t]))).epsilon(1e-12));
    // Hardest timestamp: sigmoid(2) on the hard-visible side.
    std::size_t argmax = 0;
    for (std::size_t t = 1; t < difficulties.size(); ++t)
      if (difficulties[t] > difficulties[argmax]) argmax = t;
    CHECK(hard.probs[argmax] == doctest::Approx(0.8808).epsilon(1e-3));
  }
  SUBCASE("flat difficulties give the 0.5 midpoint") {
    const auto s = informative_schedule(std::vector<double>(50, 1.0),
                                        RevealDirection::hard_visible, 1);
    for (double p : s.probs) CHECK(p == doctest::Approx(0.5));
  }
  SUBCASE("propensity-rank correlation is near +-1") {
    const auto z = rank_to_z(difficulties);
    const auto hard = informative_schedule(difficulties, RevealDirection::hard_visible, 1);
    const auto easy = informative_schedule(difficulties, RevealDirection::easy_visible, 1);
    CHECK(pearson_correlation(hard.probs, z) > 0.95);
    CHECK(pearson_correlation(easy.probs, z) < -0.95);
  }
  SUBCASE("empty difficulties are rejected") {
    CHECK_THROWS(informative_schedule({}, RevealDirection::hard_visible, 1));
  }
}
