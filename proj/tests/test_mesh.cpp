#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "jumpflux/jumpfield.hpp"
#include "jumpflux/mesh.hpp"

using namespace jumpflux;

namespace {

double total_length(const Mesh& m) { return std::accumulate(m.sizes().begin(), m.sizes().end(), 0.0); }

}  // namespace

TEST_CASE("equidistant meshes") {
  const Mesh m4 = build_equidistant(4);
  CHECK(m4.interfaces() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(m4.flagged().empty());
  const Mesh m1 = build_equidistant(1);
  CHECK(m1.cells() == 1);
  CHECK(m1.sizes()[0] == 1.0);
  const Mesh m1000 = build_equidistant(1000);
  CHECK(m1000.min_h() == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(m1000.max_h() == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK_THROWS(build_equidistant(0));
  CHECK_THROWS(Mesh({0.0, 0.5, 0.5, 1.0}));
  CHECK_THROWS(Mesh({0.0, 1.0}, {0}));
}

TEST_CASE("jump-adapted meshes") {
  const std::vector<double> none;
  CHECK(build_jump_adapted(8, none).interfaces() == build_equidistant(8).interfaces());

  const std::vector<double> j{0.3};
  const Mesh m = build_jump_adapted(4, j);
  CHECK(m.interfaces() == std::vector<double>{0.0, 0.25, 0.3, 0.5, 0.75, 1.0});
  CHECK(m.flagged() == std::vector<std::size_t>{2});
  CHECK(m.is_flagged(2));

  const std::vector<double> on{0.25};
  const Mesh m2 = build_jump_adapted(4, on);
  CHECK(m2.interfaces() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(m2.flagged() == std::vector<std::size_t>{1});

  // Uniform points within 0.1 h of a jump are dropped.
  const std::vector<double> close{0.26};
  CHECK(build_jump_adapted(4, close).interfaces() == std::vector<double>{0.0, 0.26, 0.5, 0.75, 1.0});

  const std::vector<double> unsorted{0.5, 0.3};
  CHECK_THROWS(build_jump_adapted(4, unsorted));
  const std::vector<double> outside{1.0};
  CHECK_THROWS(build_jump_adapted(4, outside));
}

TEST_CASE("wave-cell refinement examples") {
  // Wave cell of 3 min_h is split into 1.5 min_h + 1.5 min_h.
  const Mesh base({0.0, 0.1, 0.4, 0.5, 1.0}, {1});
  const Mesh refined = refine_wave_cells(base);
  CHECK(refined.min_h() == base.min_h());
  CHECK(refined.interfaces().size() == 6);
  CHECK(refined.interfaces()[2] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(refined.sizes()[1] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(refined.sizes()[2] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(refined.is_flagged(1));

  // Wave cell of 1.5 min_h is left alone.
  const Mesh small({0.0, 0.2, 0.35, 1.0}, {1});
  const Mesh same = refine_wave_cells(small);
  CHECK(same.interfaces()[1] == 0.2);
  CHECK(same.interfaces()[2] == 0.35);

  // Nothing flagged: unchanged.
  const Mesh eq = build_equidistant(16);
  CHECK(refine_wave_cells(eq).interfaces() == eq.interfaces());
}

TEST_CASE("mesh invariants over random realizations of every preset") {
  for (const auto& id : preset_ids()) {
    PresetSpec spec = PresetSpec::defaults(id);
    spec.n_quad = 64;
    const CoefficientSampler sampler(spec);
    for (int r = 0; r < 100; ++r) {
      RandomStream rng = make_stream(13, static_cast<std::uint64_t>(r));
      const SampledCoefficient a = sampler.sample(rng);
      const auto& d = a.discontinuities();
      for (int n : {16, 128}) {
        const Mesh ja = build_jump_adapted(n, d);
        for (double x : d) {
          const bool aligned = std::any_of(ja.interfaces().begin(), ja.interfaces().end(),
                                           [&](double y) { return std::abs(x - y) <= 1e-14; });
          CHECK(aligned);
        }
        CHECK(ja.flagged().size() == d.size());
        const Mesh wc = refine_wave_cells(ja);
        CHECK(wc.min_h() == ja.min_h());
        CHECK(std::abs(total_length(ja) - 1.0) <= 1e-12);
        CHECK(std::abs(total_length(wc) - 1.0) <= 1e-12);
        const double m = ja.min_h();
        for (std::size_t k : wc.flagged()) {
          for (std::size_t c : {k - 1, k}) {
            CHECK(wc.sizes()[c] >= m);
            CHECK(wc.sizes()[c] < 2.0 * m);
          }
        }
        for (std::size_t k = 0; k < d.size(); ++k) CHECK(wc.interfaces()[wc.flagged()[k]] == d[k]);
      }
    }
  }
}

TEST_CASE("strategy names") {
  for (MeshStrategy s : {MeshStrategy::Equidistant, MeshStrategy::JumpAdapted, MeshStrategy::WaveCell})
    CHECK(mesh_strategy_from_string(to_string(s)) == s);
  CHECK_THROWS(mesh_strategy_from_string("fancy"));
}

TEST_CASE("time grids") {
  CHECK(build_time_grid(1.0, 0.4) == std::vector<double>{0.0, 0.4, 0.8, 1.0});
  CHECK(build_time_grid(1.0, 1.0) == std::vector<double>{0.0, 1.0});
  CHECK(build_time_grid(0.5, 0.5) == std::vector<double>{0.0, 0.5});
  const auto t = build_time_grid(1.0, 0.1);
  CHECK(t.size() == 11);
  CHECK(t.back() == 1.0);
  CHECK_THROWS(build_time_grid(1.0, 0.0));
}

TEST_CASE("mesh csv") {
  const std::vector<double> j{0.3};
  std::ostringstream out;
  build_jump_adapted(4, j).write_csv(out);
  CHECK(out.str() == "index,x,flagged\n0,0,0\n1,0.25,0\n2,0.3,1\n3,0.5,0\n4,0.75,0\n5,1,0\n");
}
