#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "perfectsim/coupling.hpp"
#include "perfectsim/kernels.hpp"

using namespace perfectsim;
using testutil::Rng;

namespace {

// Kernel stub exposing only a prescribed global a_k sequence; for the
// AkSequence/check_conditions tests.
class SequenceOnlyKernel final : public Kernel {
 public:
  explicit SequenceOnlyKernel(std::function<double(int)> ak)
      : Kernel(Alphabet::indexed(2)), ak_(std::move(ak)) {}
  std::string id() const override { return "sequence_only"; }
  double eval(Letter, const HistorySpec&) const override { throw UnsupportedKernel("stub"); }
  double ak_bound(Letter, const Word&) const override { throw UnsupportedKernel("stub"); }
  double ak_inf(int k) const override { return ak_(k); }

 private:
  std::function<double(int)> ak_;
};

}  // namespace

TEST_CASE("markov-kernel layout fills the unit interval in two bands") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.7}, 0.7);  // memoryless
  HistorySpec h = HistorySpec::constant(0);
  BandLayout layout = build_layout(kernel, h, 3);
  REQUIRE(layout.bands.size() == 4);
  CHECK(layout.bands[0].lo == 0.0);
  CHECK(layout.bands[0].hi == doctest::Approx(kernel.ak_inf(0)));
  CHECK(layout.bands[1].hi == doctest::Approx(1.0));
  CHECK(layout.bands[2].hi == doctest::Approx(1.0));  // empty deeper bands
  CHECK(layout.letter_measure(0) + layout.letter_measure(1) == doctest::Approx(1.0));
}

TEST_CASE("alternating renewal band 0 matches the min/max formulas") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  BandLayout layout = build_layout(kernel, HistorySpec::constant(0), 2);
  const Band& b0 = layout.bands[0];
  REQUIRE(b0.segments.size() == 2);
  CHECK(b0.segments[0].letter == 0);
  CHECK(b0.segments[0].lo == 0.0);
  CHECK(b0.segments[0].hi == doctest::Approx(0.3));  // a_0(-1) = min{0.3, 0.4}
  CHECK(b0.segments[1].letter == 1);
  CHECK(b0.segments[1].hi == doctest::Approx(0.6));  // a_0
}

TEST_CASE("changepoint band widths difference the akw values") {
  auto kernel = ChangepointBinaryKernel::defaults();
  HistorySpec ones = HistorySpec::constant(1);  // T = 1: certified quickly
  const int d = 12;
  BandLayout layout = build_layout(kernel, ones, d);
  for (int k = 1; k <= d; ++k) {
    const Band& band = layout.bands[static_cast<std::size_t>(k)];
    const double expect =
        kernel.ak_word_total(ones.prefix(k)) - kernel.ak_word_total(ones.prefix(k - 1));
    double width = 0.0;
    for (const auto& seg : band.segments) width += seg.hi - seg.lo;
    REQUIRE(width == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("eval_f: band 0 ignores the history") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double u = rng.next_double() * kernel.ak_inf(0);
    const auto base = eval_f(kernel, u, testutil::random_binary_history(rng, 6));
    REQUIRE(base.depth_used == 0);
    for (int j = 0; j < 5; ++j) {
      const auto other = eval_f(kernel, u, testutil::random_binary_history(rng, 8));
      REQUIRE(other.letter == base.letter);
      REQUIRE(other.depth_used == 0);
    }
  }
}

TEST_CASE("boundary uniforms belong to the interval on their right") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  HistorySpec h = HistorySpec::constant(0);
  // segment edges at 0.3 (band-0 letter change) and 0.6 (band boundary)
  CHECK(eval_f(kernel, 0.0, h).letter == 0);
  CHECK(eval_f(kernel, 0.3, h).letter == 1);
  CHECK(eval_f(kernel, 0.3, h).depth_used == 0);
  const auto at_band_edge = eval_f(kernel, 0.6, h);
  CHECK(at_band_edge.depth_used == 1);
}

TEST_CASE("eval_f on a markov kernel depends only on the last letter") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.7}, 0.7);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double u = rng.next_double();
    const Letter w1 = rng.next_int(2);
    FResult first{0, 0};
    for (int j = 0; j < 100; ++j) {
      HistorySpec h = testutil::random_binary_history(rng, rng.next_int(6));
      h = h.prepend(w1);
      const auto r = eval_f(kernel, u, h);
      REQUIRE(r.depth_used <= 1);
      if (j == 0)
        first = r;
      else
        REQUIRE(r.letter == first.letter);
    }
  }
}

TEST_CASE("level sets of eval_f carry exactly the kernel probabilities") {
  // per-letter layout measure at depth d equals a_d(g|w); on histories where
  // the bounds converge fast the residual to eval_p is below 1e-12
  auto ar = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    HistorySpec h = testutil::random_binary_history(rng, rng.next_int(10));
    BandLayout layout = build_layout(ar, h, 6);
    for (Letter g = 0; g < 2; ++g)
      REQUIRE(layout.letter_measure(g) == doctest::Approx(ar.eval(g, h)).epsilon(1e-12));
  }
  auto cp = ChangepointBinaryKernel::defaults();
  int tested = 0;
  for (int i = 0; i < 2000 && tested < 500; ++i) {
    HistorySpec h = testutil::random_binary_history(rng, rng.next_int(10));
    if (cp.decide_T(h) == kInfiniteRun || cp.decide_T(h) > 40) continue;  // gamma branch only
    ++tested;
    BandLayout layout = build_layout(cp, h, 100);
    for (Letter g = 0; g < 2; ++g)
      REQUIRE(layout.letter_measure(g) == doctest::Approx(cp.eval(g, h)).epsilon(1e-12));
  }
  REQUIRE(tested == 500);
}

TEST_CASE("iterate_f base case and prefix consistency") {
  auto kernel = ChangepointBinaryKernel::defaults();
  HistorySpec h = HistorySpec::constant(1);
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double u = rng.next_double();
    Word one = iterate_f(kernel, std::vector<double>{u}, h);
    REQUIRE(one.length() == 1);
    REQUIRE(one.at_depth(1) == eval_f(kernel, u, h).letter);

    std::vector<double> us(5);
    for (auto& x : us) x = rng.next_double();
    Word full = iterate_f(kernel, us, h);
    std::vector<double> tail(us.begin() + 1, us.end());
    Word partial = iterate_f(kernel, tail, h);
    REQUIRE(full.length() == 5);
    for (int j = 1; j <= 4; ++j) REQUIRE(full.at_depth(j + 1) == partial.at_depth(j));
  }
}

TEST_CASE("iterate_f realizes the n-step law") {
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  HistorySpec h(Word::most_recent_first({1, 0}), Tail::constant(0));
  // exact 3-step law by chaining eval
  std::map<std::vector<Letter>, double> exact;
  for (Letter g0 = 0; g0 < 2; ++g0)
    for (Letter g1 = 0; g1 < 2; ++g1)
      for (Letter g2 = 0; g2 < 2; ++g2) {
        HistorySpec h0 = h;
        double p = kernel.eval(g0, h0);
        h0 = h0.prepend(g0);
        p *= kernel.eval(g1, h0);
        h0 = h0.prepend(g1);
        p *= kernel.eval(g2, h0);
        exact[{g0, g1, g2}] = p;
      }
  std::map<std::vector<Letter>, double> hits;
  Rng rng(13);
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    // most-recent-first input: the last element is consumed first
    std::vector<double> us{rng.next_double(), rng.next_double(), rng.next_double()};
    Word w = iterate_f(kernel, us, h);
    hits[{w.at_depth(3), w.at_depth(2), w.at_depth(1)}] += 1.0 / N;
  }
  double tv = 0.0;
  for (const auto& [word, p] : exact) {
    auto it = hits.find(word);
    tv += std::abs((it == hits.end() ? 0.0 : it->second) - p);
  }
  CHECK(tv / 2.0 <= 0.01);
}

TEST_CASE("history locality: the read depth bounds the dependence") {
  auto kernel = ChangepointBinaryKernel::defaults();
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    HistorySpec h = testutil::random_binary_history(rng, 12);
    const double u = rng.next_double() * 0.99;  // keeps the read depth moderate
    const auto r = eval_f(kernel, u, h);
    for (int j = 0; j < 20; ++j) {
      // keep the first depth_used letters, change everything deeper
      Word kept = h.prefix(r.depth_used);
      HistorySpec perturbed(kept, testutil::random_binary_history(rng, 0).tail());
      const auto r2 = eval_f(kernel, u, perturbed);
      REQUIRE(r2.letter == r.letter);
      REQUIRE(r2.depth_used == r.depth_used);
    }
  }
}

TEST_CASE("layout construction is deterministic") {
  auto kernel = ChangepointBinaryKernel::defaults();
  HistorySpec h(Word::most_recent_first({1, 0, 1, 1, 0}), Tail::constant(0));
  std::ostringstream a, b;
  dump_layout_csv(build_layout(kernel, h, 10), a);
  dump_layout_csv(build_layout(kernel, h, 10), b);
  CHECK(a.str() == b.str());
  CHECK(a.str().substr(0, 18) == "k,letter,start,end");
}

TEST_CASE("depth_K: definition and boundary cases") {
  SequenceOnlyKernel ones_kernel([](int) { return 1.0; });
  AkSequence all_one(ones_kernel);
  CHECK(all_one.depth_K(0.0) == 0);
  CHECK(all_one.depth_K(0.999999) == 0);

  // the slow instance: a_k = 1 - 1/(2 sqrt(k+1)) for k >= 1
  auto slow_kernel = AlternatingRenewalKernel::slow_sqrt();
  AkSequence slow(slow_kernel);
  CHECK(slow.depth_K(0.8) == 6);  // 1 - 1/(2 sqrt 7) ~ 0.811 first exceeds 0.8
  CHECK(slow.depth_K(0.0) == 0);  // a_0 ~ 0.293 > 0

  auto ar = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  AkSequence seq(ar);
  CHECK(seq.depth_K(0.0) == 0);
  CHECK(seq.depth_K(0.59999) == 0);
  CHECK(seq.depth_K(0.6) == 1);  // half-open: u = a_0 needs the next band
  CHECK(seq.depth_K(0.65) == 1);
  CHECK(seq.depth_K(0.7) == 2);
  CHECK(seq.depth_K(0.99) == 2);

  SequenceOnlyKernel half_kernel([](int) { return 0.5; });
  AkSequence capped(half_kernel);
  CHECK_THROWS_AS((void)capped.depth_K(0.7, 1000), DepthCapExceeded);
}

TEST_CASE("check_conditions verdicts") {
  // all a_k = 1: S_n = n + 1 diverges, P_n = 1
  SequenceOnlyKernel ones_kernel([](int) { return 1.0; });
  AkSequence ones(ones_kernel);
  auto rep = check_conditions(ones, 10000);
  CHECK(rep.partial_sum == doctest::Approx(10001.0));
  CHECK(rep.partial_product == doctest::Approx(1.0));
  CHECK(rep.condition_a_diverges);
  CHECK(rep.condition_b_positive);
  CHECK(rep.heuristic);

  // the slow instance violates condition (a)
  SequenceOnlyKernel slow_kernel(
      [](int k) { return k == 0 ? 1.0 - 1.0 / std::sqrt(2.0) : 1.0 - 0.5 / std::sqrt(k + 1.0); });
  AkSequence slow(slow_kernel);
  rep = check_conditions(slow, 20000);
  CHECK_FALSE(rep.condition_a_diverges);
  CHECK_FALSE(rep.condition_b_positive);

  // geometric approach to 1: the infinite product stays positive
  SequenceOnlyKernel geo_kernel([](int k) { return 1.0 - std::pow(2.0, -(k + 1.0)); });
  AkSequence geo(geo_kernel);
  rep = check_conditions(geo, 20000);
  double brute = 1.0;
  for (int k = 0; k <= 20000; ++k) brute *= 1.0 - std::pow(2.0, -(k + 1.0));
  CHECK(rep.partial_product == doctest::Approx(brute).epsilon(1e-12));
  CHECK(rep.partial_product == doctest::Approx(0.2887880951).epsilon(1e-9));
  CHECK(rep.condition_a_diverges);
  CHECK(rep.condition_b_positive);
}

TEST_CASE("negative increments beyond the clip are hard errors") {
  class Corrupt final : public Kernel {
   public:
    Corrupt() : Kernel(Alphabet::indexed(2)), base_(AlternatingRenewalKernel::table_symmetric({0.3}, 0.6)) {}
    std::string id() const override { return "corrupt"; }
    double eval(Letter g, const HistorySpec& h) const override { return base_.eval(g, h); }
    double ak_bound(Letter g, const Word& w) const override {
      const double v = base_.ak_bound(g, w);
      return w.length() == 1 ? v + 2e-3 : v;  // overshoot makes b_2 negative
    }
    double ak_inf(int k) const override { return base_.ak_inf(k); }

   private:
    AlternatingRenewalKernel base_;
  };
  Corrupt corrupt;
  CHECK_THROWS_AS((void)build_layout(corrupt, HistorySpec::constant(0), 5), NegativeIncrement);
}
