#include <doctest.h>

#include <cmath>

#include "panelcp/rng.hpp"
#include "panelcp/temporal.hpp"

using namespace panelcp;

TEST_CASE("level update arithmetic") {
  auto s = make_temporal_state(0.1, 0.01);
  CHECK(s.alpha == 0.1);

  SUBCASE("miss shrinks the level") {
    update_level(s, true, 1);
    CHECK(s.alpha == doctest::Approx(0.091).epsilon(1e-15));
    CHECK(s.s_count == 1);
    CHECK(s.loss_sum == 1.0);
  }
  SUBCASE("cover grows the level") {
    update_level(s, true, 0);
    CHECK(s.alpha == doctest::Approx(0.101).epsilon(1e-15));
  }
  SUBCASE("no reveal carries everything forward") {
    update_level(s, false, std::nullopt);
    CHECK(s.alpha == 0.1);
    CHECK(s.s_count == 0);
    CHECK(s.loss_sum == 0.0);
  }
  SUBCASE("contract violations") {
    CHECK_THROWS(update_level(s, true, std::nullopt));
    CHECK_THROWS(update_level(s, false, 1));
    CHECK_THROWS(update_level(s, true, 2));
  }
}

TEST_CASE("telescoping identity") {
  SUBCASE("empty trace") {
    CHECK(audit_telescoping({}, 0.1, 0.1, 0.01) == doctest::Approx(0.0));
  }
  SUBCASE("single revealed miss") {
    auto s = make_temporal_state(0.1, 0.01);
    update_level(s, true, 1);
    const TraceStep step{true, 1};
    CHECK(std::abs(audit_telescoping(std::vector<TraceStep>{step}, s.alpha, 0.1, 0.01)) <=
          1e-12);
  }
  SUBCASE("ten thousand random rounds stay within 1e-9") {
    Rng rng(515, 0);
    auto s = make_temporal_state(0.25, 0.005);
    std::vector<TraceStep> trace;
    for (int t = 0; t < 10000; ++t) {
      TraceStep step;
      step.revealed = rng.uniform() < 0.6;
      if (step.revealed) {
        step.loss = rng.uniform() < 0.25 ? 1 : 0;
        update_level(s, true, step.loss);
      } else {
        update_level(s, false, std::nullopt);
      }
      trace.push_back(step);
    }
    CHECK(std::abs(audit_telescoping(trace, s.alpha, 0.25, 0.005)) <= 1e-9);
  }
}

TEST_CASE("observed-feedback bound") {
  SUBCASE("bound value by substitution") {
    std::vector<TraceStep> trace(100, TraceStep{true, 0});
    const auto out = audit_observed_bound(trace, 0.1, 0.01);
    REQUIRE(out.applicable);
    CHECK(out.bound == doctest::Approx(0.91).epsilon(1e-12));
    // All-covered trace: lhs = alpha, below the bound at this length.
    CHECK(out.lhs == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(out.holds);
  }
  SUBCASE("no feedback means not applicable") {
    std::vector<TraceStep> trace(10, TraceStep{false, -1});
    CHECK_FALSE(audit_observed_bound(trace, 0.1, 0.01).applicable);
  }
  SUBCASE("an adversarial hand trace can violate the bound") {
    // Sanity that the audit is not vacuous: 2000 all-covered rounds make
    // lhs = alpha exceed (0.9 + gamma) / (S gamma).
    std::vector<TraceStep> trace(2000, TraceStep{true, 0});
    const auto out = audit_observed_bound(trace, 0.1, 0.01);
    CHECK_FALSE(out.holds);
  }
}
