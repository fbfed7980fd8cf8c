#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "perfectsim/kernels.hpp"
#include "perfectsim/verify.hpp"

using namespace perfectsim;
using testutil::Rng;

namespace {

// Memoryless kernel with P(letter 1) = q regardless of the past.
AlternatingRenewalKernel bernoulli_kernel(double q) {
  AlternatingRenewalKernel::Params p;
  p.survival_minus = {1.0 - q};
  p.survival_plus = {q};
  p.limit_minus = 1.0 - q;
  p.limit_plus = q;
  return AlternatingRenewalKernel::table(std::move(p));
}

// Delegating wrapper with parity-oscillating sub-clip dips in ak_bound over
// a flat band region; the only corruption class that slips past the
// NegativeIncrement check and surfaces as clipped measure.
class DipKernel final : public Kernel {
 public:
  DipKernel()
      : Kernel(Alphabet({"-1", "+1"})),
        base_(AlternatingRenewalKernel::table_symmetric({0.3}, 0.6)) {}
  std::string id() const override { return "dip_fixture"; }
  double eval(Letter g, const HistorySpec& h) const override { return base_.eval(g, h); }
  double ak_bound(Letter g, const Word& w) const override {
    const double v = base_.ak_bound(g, w);
    const int k = w.length();
    if (g == 0 && k >= 10 && k < 2500 && k % 2 == 1) return v - 9.9e-10;
    return v;
  }
  double ak_inf(int k) const override { return base_.ak_inf(k); }

 private:
  AlternatingRenewalKernel base_;
};

}  // namespace

TEST_CASE("stationary oracle: memoryless kernels give the Bernoulli marginal") {
  for (double q : {0.25, 0.5, 0.8}) {
    auto kernel = bernoulli_kernel(q);
    const auto oracle = TruncatedChainOracle::build(kernel);
    const auto law = oracle.window_law(1);
    REQUIRE(law.size() == 2);
    CHECK(law[0] == doctest::Approx(1.0 - q).epsilon(1e-10));
    CHECK(law[1] == doctest::Approx(q).epsilon(1e-10));
  }
}

TEST_CASE("stationary oracle: symmetric alternating renewal is half-half") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  const auto oracle = TruncatedChainOracle::build(kernel);
  const auto law = oracle.window_law(1);
  CHECK(law[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(law[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("stationary oracle: the 4-state renewal chain solves to 3/14, 2/7") {
  // balance for p_1 = 0.3, p_inf = 0.6: x = 0.6 x + 0.3 y with x + y = 1/2
  // per sign, so x = 3/14 (same-sign pairs) and y = 2/7 (mixed pairs)
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  const auto oracle = TruncatedChainOracle::build(kernel);
  REQUIRE(oracle.memory() == 2);
  REQUIRE(oracle.state_count() == 4);
  for (int i = 0; i < 4; ++i) {
    const Word& s = oracle.states()[static_cast<std::size_t>(i)];
    const double expect = s.at_depth(1) == s.at_depth(2) ? 3.0 / 14.0 : 2.0 / 7.0;
    REQUIRE(oracle.stationary()[static_cast<std::size_t>(i)] ==
            doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK(oracle.stationary_residual() <= 1e-10);
  const auto law2 = oracle.window_law(2);
  CHECK(law2[0] == doctest::Approx(3.0 / 14.0).epsilon(1e-10));  // (0,0)
  CHECK(law2[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-10));   // (0,1)
  CHECK(law2[2] == doctest::Approx(2.0 / 7.0).epsilon(1e-10));
  CHECK(law2[3] == doctest::Approx(3.0 / 14.0).epsilon(1e-10));
  double total = 0.0;
  for (double p : oracle.window_law(3)) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("stationary oracle: dense fallback handles periodic chains") {
  // bipartite walk 1 <-> {0, 2}: power iteration from uniform oscillates
  GeneralizedWalkKernel::Params p;
  p.alphabet = Alphabet::indexed(3);
  p.arcs = {{false, true, false}, {true, false, true}, {false, true, false}};
  p.p_low = {{0.0, 1.0, 0.0}, {0.3, 0.0, 0.7}, {0.0, 1.0, 0.0}};
  p.p_high = p.p_low;
  p.memory = 1;
  auto kernel = GeneralizedWalkKernel(std::move(p));
  const auto oracle = TruncatedChainOracle::build(kernel);
  REQUIRE(oracle.state_count() == 3);
  const auto law = oracle.window_law(1);
  CHECK(law[0] == doctest::Approx(0.15).epsilon(1e-9));
  CHECK(law[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(law[2] == doctest::Approx(0.35).epsilon(1e-9));
  CHECK(oracle.stationary_residual() <= 1e-10);
}

TEST_CASE("oracle refuses kernels without certified memory") {
  auto kernel = ChangepointBinaryKernel::defaults();
  CHECK_THROWS_AS((void)TruncatedChainOracle::build(kernel), NotFiniteMemory);
  auto slow = AlternatingRenewalKernel::slow_sqrt();
  CHECK_THROWS_AS((void)TruncatedChainOracle::build(slow), NotFiniteMemory);
}

TEST_CASE("finite-memory certification: deep perturbations change nothing") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  REQUIRE(kernel.finite_memory_order() == 2);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    HistorySpec a = testutil::random_binary_history(rng, 2 + rng.next_int(6));
    HistorySpec b(a.prefix(2), testutil::random_binary_history(rng, 0).tail());
    for (Letter g = 0; g < 2; ++g) REQUIRE(kernel.eval(g, a) == kernel.eval(g, b));
  }
}

TEST_CASE("tv distance basics") {
  CHECK(tv_distance({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  CHECK(tv_distance({1.0, 0.0}, {0.0, 1.0}) == 1.0);
  CHECK(tv_distance({0.6, 0.4}, {0.5, 0.5}) == doctest::Approx(0.1));
  CHECK_THROWS_AS((void)tv_distance({1.0}, {0.5, 0.5}), SupportMismatch);
}

TEST_CASE("chi-square and the gamma tail") {
  CHECK(gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(gamma_q(0.5, 1.0) == doctest::Approx(std::erfc(1.0)).epsilon(1e-10));
  CHECK(gamma_q(2.5, 0.0) == doctest::Approx(1.0));

  const auto same = chi_square({2500, 2500, 2500, 2500}, {0.25, 0.25, 0.25, 0.25});
  CHECK(same.statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));
  const auto off = chi_square({9000, 1000}, {0.5, 0.5});
  CHECK(off.p_value < 1e-10);
  CHECK_THROWS_AS((void)chi_square({1, 2, 3}, {0.5, 0.5}), SupportMismatch);
}

TEST_CASE("measure audit is exact for the bundled kernels") {
  auto ar = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  CHECK(measure_audit(ar, 20, 100).max_discrepancy <= 1e-12);
  auto cp = ChangepointBinaryKernel::defaults();
  CHECK(measure_audit(cp, 20, 100).max_discrepancy <= 1e-12);
  auto walk = GeneralizedWalkKernel(testutil::triangle_walk_params());
  CHECK(measure_audit(walk, 20, 100).max_discrepancy <= 1e-12);
}

TEST_CASE("measure audit flags a corrupted bound rule") {
  DipKernel corrupt;
  const auto res = measure_audit(corrupt, 2600, 3);
  CHECK(res.max_discrepancy > 1e-6);
}

TEST_CASE("random admissible histories respect the arc set") {
  auto walk = GeneralizedWalkKernel(testutil::triangle_walk_params());
  for (int i = 0; i < 300; ++i) {
    HistorySpec h = random_admissible_history(walk, 8, 100 + i);
    REQUIRE(is_admissible_history(h, walk));
  }
}
