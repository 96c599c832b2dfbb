#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jumpflux/jumpfield.hpp"

using namespace jumpflux;

namespace {

std::shared_ptr<const KLBasis> small_basis(double nu) {
  return nystrom_eigenpairs(CovarianceSpec{nu, 0.1, 0.1, {}}, 128, 20);
}

}  // namespace

TEST_CASE("partition construction") {
  Partition p({}, {0.7, 0.2, 0.2 + 1e-14, 0.5});
  CHECK(p.breakpoints() == std::vector<double>{0.2, 0.5, 0.7});
  CHECK(p.cells() == 4);
  CHECK(p.cell_of(0.1) == 0);
  CHECK(p.cell_of(0.2) == 1);  // right-continuous
  CHECK(p.cell_of(0.69) == 2);
  CHECK(p.cell_of(0.9) == 3);
  CHECK_THROWS(Partition({}, {0.0}));
  CHECK_THROWS(Partition({}, {1.0}));
  CHECK_THROWS(Partition({}, {1.5}));
}

TEST_CASE("sampled partitions are sorted, interior and have Poi(5)+1 points on average") {
  const int m = 10000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < m; ++k) {
    RandomStream rng = make_stream(11, static_cast<std::uint64_t>(k));
    const Partition p = sample_partition(PoissonCount{5.0}, {}, rng);
    const auto& b = p.breakpoints();
    REQUIRE(!b.empty());
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(b[i] > 0.0);
      CHECK(b[i] < 1.0);
      if (i > 0) CHECK(b[i] > b[i - 1]);
    }
    sum += static_cast<double>(b.size());
    sq += static_cast<double>(b.size() * b.size());
  }
  const double mean = sum / m;
  const double se = std::sqrt((sq / m - mean * mean) / m);
  CHECK(std::abs(mean - 6.0) <= 3.0 * se);
}

TEST_CASE("coefficient evaluation") {
  SampledCoefficient a = make_coefficient({}, std::nullopt, JumpField(Partition({}, {}), {0.5}));
  CHECK(a(0.3) == 0.5);

  // ā ≡ 0, φ = exp, W ≡ 0, P ≡ 0.5 gives 1.5.
  const auto basis = small_basis(0.5);
  SampledCoefficient b = make_coefficient({}, KLRealization(basis, std::vector<double>(20, 0.0)),
                                          JumpField(Partition({}, {}), {0.5}));
  for (double x : {0.0, 0.25, 1.0}) CHECK(b(x) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(b.lower_bound() == doctest::Approx(1.5));
  CHECK(b.upper_bound() == doctest::Approx(1.5));

  SampledCoefficient c = make_coefficient({}, std::nullopt, JumpField(Partition({}, {0.4}), {1.0, 3.0}));
  CHECK(c(0.4) == 3.0);  // right limit at the breakpoint
  CHECK(c(std::nextafter(0.4, 0.0)) == 1.0);
  CHECK(c.discontinuities() == std::vector<double>{0.4});
  CHECK_THROWS(c(NAN));
  CHECK_THROWS(JumpField(Partition({}, {0.4}), {1.0}));
  CHECK_THROWS(JumpField(Partition({}, {0.4}), {1.0, -2.0}));
}

TEST_CASE("alternating preset heights") {
  const auto basis = small_basis(0.5);
  for (int k = 0; k < 50; ++k) {
    RandomStream rng = make_stream(3, static_cast<std::uint64_t>(k));
    const SampledCoefficient a = preset_alternating_exponential(basis, rng);
    REQUIRE(a.jumps());
    const auto& heights = a.jumps()->heights();
    for (std::size_t i = 0; i < heights.size(); ++i) {
      if (i % 2 == 0) {
        CHECK(heights[i] >= 0.25);
        CHECK(heights[i] <= 0.75);
      } else {
        CHECK(heights[i] >= 1.25);
        CHECK(heights[i] <= 1.75);
      }
    }
    // Odd cell with the Gaussian part suppressed.
    const double x = 0.5 * (a.domain().left + a.discontinuities().front());
    CHECK(a.without_gauss(x) >= 0.25);
    CHECK(a.without_gauss(x) <= 0.75);
  }
}

TEST_CASE("poisson heights have mean 6") {
  const auto basis = nystrom_eigenpairs(CovarianceSpec{CovarianceSpec::kInfiniteSmoothness, 0.1, 0.1, {}}, 16, 4);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (int k = 0; k < 10000; ++k) {
    RandomStream rng = make_stream(17, static_cast<std::uint64_t>(k));
    const SampledCoefficient a = preset_poisson_squaredexp(basis, rng);
    const double h = a.jumps()->heights().front();
    sum += h;
    sq += h * h;
    ++n;
  }
  const double mean = sum / static_cast<double>(n);
  const double se = std::sqrt((sq / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
  CHECK(std::abs(mean - 6.0) <= 3.0 * se);
}

TEST_CASE("inclusion preset") {
  for (int k = 0; k < 100; ++k) {
    RandomStream rng = make_stream(23, static_cast<std::uint64_t>(k));
    const SampledCoefficient a = preset_inclusions({}, rng);
    CHECK(!a.has_gauss());
    const auto& d = a.discontinuities();
    REQUIRE(d.size() >= 2);
    // Outside all inclusions the coefficient is 1.
    CHECK(a(0.5 * d.front()) == 1.0);
    CHECK(a(0.5 * (d.back() + 1.0)) == 1.0);
    for (double h : a.jumps()->heights()) {
      const bool direct = h == std::round(h) && h >= 1.0;
      const bool reciprocal = std::abs(1.0 / h - std::round(1.0 / h)) < 1e-9;
      CHECK((direct || reciprocal));
    }
    // Adjacent cells carry distinct heights, so every breakpoint is a jump.
    const auto& heights = a.jumps()->heights();
    for (std::size_t i = 1; i < heights.size(); ++i) CHECK(heights[i] != heights[i - 1]);
  }
}

TEST_CASE("deterministic study coefficients") {
  const double c = 1.0 - std::numbers::pi / 10.0;
  const SampledCoefficient up = preset_deterministic_study(UpJump{1.0 / 16.0});
  CHECK(up(c) == doctest::Approx(24.0));
  CHECK(up(0.1) == 0.5);
  const SampledCoefficient down = preset_deterministic_study(DownJump{1.0 / 256.0});
  CHECK(down(c) == 1.0 / 256.0);
  CHECK(down(0.1) == 1.5);
  const SampledCoefficient two = preset_deterministic_study(TwoLevel{1.0, 50.0, 0.1});
  CHECK(two(std::numbers::pi / 5.0) == 50.0);
  CHECK(two(std::numbers::pi / 5.0 - 0.051) == 1.0);
  CHECK(two(std::numbers::pi / 5.0 + 0.051) == 1.0);
  CHECK(two.discontinuities().size() == 2);

  RandomStream rng = make_stream(1, 0);
  const SampledCoefficient alt = preset_deterministic_study(AlternatingFixed{16}, rng);
  CHECK(alt.discontinuities().size() == 16);
  CHECK(alt(0.0) == 0.5);
  CHECK(alt.jumps()->heights()[1] == 1.5);
}

TEST_CASE("positivity, piecewise structure and discontinuity completeness for every preset") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& id : preset_ids()) {
    PresetSpec spec = PresetSpec::defaults(id);
    spec.n_quad = 128;
    const CoefficientSampler sampler(spec);
    for (int r = 0; r < 100; ++r) {
      RandomStream rng = make_stream(31, static_cast<std::uint64_t>(r));
      const SampledCoefficient a = sampler.sample(rng);
      for (int k = 0; k < 200; ++k) CHECK(a(u(gen)) > 0.0);
      if (r >= 3) continue;

      const auto& d = a.discontinuities();
      const auto& heights = a.jumps()->heights();
      for (std::size_t k = 0; k < d.size(); ++k) {
        const double left = a.without_gauss(std::nextafter(d[k], -1.0));
        const double right = a.without_gauss(d[k]);
        CHECK(left == heights[k]);
        CHECK(right == heights[k + 1]);
        if (heights[k] != heights[k + 1]) CHECK(left != right);
      }
      // Scan a fine grid: jumps larger than the Gaussian part's variation
      // only occur across listed discontinuities.
      const int n = 20000;
      double prev = a(0.0);
      for (int k = 1; k <= n; ++k) {
        const double x0 = (k - 1.0) / n, x1 = static_cast<double>(k) / n;
        const double v = a(x1);
        if (std::abs(v - prev) > 0.2 * std::max(1.0, std::abs(prev))) {
          const bool listed = std::any_of(d.begin(), d.end(), [&](double b) { return b > x0 && b <= x1; });
          CHECK_MESSAGE(listed, id << " unexplained jump near " << x1);
        }
        prev = v;
      }
      if (!a.has_gauss() && !d.empty()) {
        // Exactly constant between breakpoints.
        const double lo = d.front() * 0.1, hi = d.front() * 0.9;
        CHECK(a(lo) == a(hi));
      }
    }
  }
}

TEST_CASE("sampler determinism and unknown presets") {
  PresetSpec spec = PresetSpec::defaults("alternating_exponential");
  spec.n_quad = 64;
  const CoefficientSampler sampler(spec);
  RandomStream r1 = make_stream(77, 2), r2 = make_stream(77, 2);
  const SampledCoefficient a = sampler.sample(r1), b = sampler.sample(r2);
  for (double x : {0.1, 0.33, 0.9}) CHECK(a(x) == b(x));
  CHECK_THROWS(PresetSpec::defaults("nope"));
}
