#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affthermo/classify.hpp"
#include "affthermo/geometry.hpp"
#include "affthermo/pressure.hpp"
#include "affthermo/symbolic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace affthermo;

namespace {

constexpr int kCases = 10000;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Mat2 matrix(double scale = 1.0) {
    return Mat2{uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)} * scale;
  }
  /// Contractive matrix with norm in (0, 0.9].
  Mat2 contraction() {
    const Mat2 m = matrix();
    return m * (uniform(0.1, 0.9) / op_norm(m));
  }
  Mat2 positive() { return Mat2{uniform(0.05, 0.4), uniform(0.05, 0.4), uniform(0.05, 0.4), uniform(0.05, 0.4)}; }
  AffineIFS tuple(int letters) {
    std::vector<Mat2> ms;
    for (int i = 0; i < letters; ++i) ms.push_back(contraction());
    return AffineIFS::from_matrices(ms);
  }
};

PressureOptions plain() {
  PressureOptions o;
  o.auto_certify = false;
  return o;
}

}  // namespace

TEST_CASE("phi^s is submultiplicative") {
  Gen g(1);
  for (int i = 0; i < kCases; ++i) {
    const Mat2 a = g.matrix(2.0), b = g.matrix(2.0);
    for (double s : {0.0, 0.3, 1.0, 1.5, 2.0, 2.7}) {
      REQUIRE(svf_phi(a * b, s) <= svf_phi(a, s) * svf_phi(b, s) * (1 + 1e-9) + 1e-300);
    }
  }
}

TEST_CASE("singular values: product, norm and alpha_2 supermultiplicativity") {
  Gen g(2);
  for (int i = 0; i < kCases; ++i) {
    const Mat2 a = g.matrix(), b = g.matrix();
    const auto sv = singular_values(a);
    REQUIRE(sv.first * sv.second == doctest::Approx(std::abs(a.det())).epsilon(1e-12).scale(1.0));
    // Operator norm as the square root of the top eigenvalue of A^T A.
    const Mat2 gram = a.transpose() * a;
    const double top = gram.trace() / 2 + std::sqrt(std::max(0.0, gram.trace() * gram.trace() / 4 - gram.det()));
    REQUIRE(sv.first == doctest::Approx(std::sqrt(top)).epsilon(1e-10));
    REQUIRE(singular_values(a * b).second >= sv.second * singular_values(b).second * (1 - 1e-9) - 1e-15);
    if (op_norm(a) <= 1.0) {
      double prev = 2.0;
      for (double s = 0.0; s <= 3.0; s += 0.25) {
        const double v = svf_phi(a, s);
        REQUIRE(v <= prev * (1 + 1e-12));
        prev = v;
      }
    }
  }
}

TEST_CASE("rank-one factorization reconstructs and squares correctly") {
  Gen g(3);
  for (int i = 0; i < kCases; ++i) {
    const Vec2 v{g.uniform(-1, 1), g.uniform(-1, 1)};
    Vec2 w{g.uniform(-1, 1), g.uniform(-1, 1)};
    if (i % 10 == 0) w = Vec2{-v.y, v.x} * g.uniform(0.2, 2.0);  // nilpotent cases
    const Mat2 a{v.x * w.x, v.x * w.y, v.y * w.x, v.y * w.y};
    if (v.norm() * w.norm() < 1e-3) continue;
    const auto f = rank_one_factor(a);
    REQUIRE((f.reconstruct() - a).max_abs() <= 1e-10 * a.max_abs());
    const double inner = f.nilpotent ? 0.0 : f.scale;
    REQUIRE(((a * a) - a * inner).max_abs() <= 1e-10 * std::max(1.0, a.max_abs() * a.max_abs()));
  }
}

TEST_CASE("level sets: counting, prefix closure, cached products and shift invariance") {
  Gen g(4);
  for (int letters = 1; letters <= 4; ++letters) {
    const auto ifs = g.tuple(letters);
    for (int n = 1; n <= (letters <= 2 ? 12 : letters == 3 ? 8 : 6); ++n) {
      REQUIRE(enumerate_level(ifs, SubshiftKind::Full, n).size() ==
              static_cast<std::size_t>(std::pow(letters, n)));
    }
  }
  const auto sigma = AffineIFS::from_matrices({{0, 1, 0, 0}, Mat2::diag(0, 1), {0.3, 0, 0, 0}});
  for (int n = 1; n <= 7; ++n) {
    const auto level = enumerate_level(sigma, SubshiftKind::Sigma, n + 1);
    const auto shorter = enumerate_level(sigma, SubshiftKind::Sigma, n);
    std::set<Word> known;
    for (const auto& e : shorter.entries) known.insert(e.word);
    for (const auto& e : level.entries) {
      REQUIRE(known.count(e.word.prefix(n)) == 1);
      REQUIRE(known.count(shift(e.word)) == 1);
    }
  }
  int checked = 0;
  while (checked < kCases) {
    const auto ifs = g.tuple(g.integer(1, 3));
    for (const auto& e : enumerate_level(ifs, SubshiftKind::Full, 4).entries) {
      const Mat2 fresh = word_product(ifs, e.word);
      REQUIRE((fresh - e.product).max_abs() <= 1e-12 * std::max(1e-300, fresh.max_abs()) + 1e-300);
      if (++checked >= kCases) break;
    }
  }
}

TEST_CASE("pressure upper bounds: Fekete, Lipschitz in s, monotone, dispatch") {
  Gen g(5);
  for (int i = 0; i < kCases; ++i) {
    const auto ifs = g.tuple(g.integer(1, 3));
    const double t = g.uniform(0.0, 2.5);
    const double s = t + g.uniform(0.0, 0.5);
    const int n = g.integer(1, 5);
    const auto opts = plain();
    const auto at_t = pressure_estimate(ifs, SubshiftKind::Full, t, n, opts);
    const auto at_s = pressure_estimate(ifs, SubshiftKind::Full, s, n, opts);
    const auto deeper = pressure_estimate(ifs, SubshiftKind::Full, s, n + 1, opts);
    REQUIRE(deeper.upper <= at_s.upper);
    REQUIRE(at_s.upper <= at_t.upper + 1e-12);
    REQUIRE(at_s.upper <= at_t.upper + (s - t) * std::log(ifs.max_norm()) + 1e-9);
    REQUIRE(at_s.lower <= at_s.upper);
    if (s > 0.0) REQUIRE(pressure_dispatch(ifs, s, n, opts).upper == at_s.upper);
  }
}

TEST_CASE("certified bounds are consistent across depths") {
  Gen g(6);
  for (int i = 0; i < 200; ++i) {
    const auto ifs = AffineIFS::from_matrices({g.positive(), g.positive(), g.positive()});
    const double s = g.uniform(0.05, 1.95);
    const auto shallow = pressure_estimate(ifs, SubshiftKind::Full, s, 2);
    const auto deep = pressure_estimate(ifs, SubshiftKind::Full, s, 7);
    REQUIRE(shallow.lower <= deep.upper + 1e-12);
    REQUIRE(deep.lower <= shallow.upper + 1e-12);
  }
}

TEST_CASE("conformal tuples are exact at every depth") {
  Gen g(7);
  for (int i = 0; i < kCases / 10; ++i) {
    std::vector<Mat2> ms;
    for (int k = g.integer(1, 3); k > 0; --k) ms.push_back(Mat2::rotation(g.uniform(0, 6.3)) * g.uniform(0.1, 0.9));
    const auto ifs = AffineIFS::from_matrices(ms);
    const auto e = pressure_estimate(ifs, SubshiftKind::Full, g.uniform(0.0, 3.0), g.integer(1, 5));
    REQUIRE(e.lower == e.upper);
  }
}

TEST_CASE("Jensen: entropy plus energy never exceeds the level pressure") {
  Gen g(8);
  for (int i = 0; i < kCases; ++i) {
    const int letters = g.integer(1, 3);
    std::vector<Mat2> ms;
    for (int k = 0; k < letters; ++k) ms.push_back(g.contraction());
    const auto ifs = AffineIFS::from_matrices(ms);
    const int n = g.integer(1, 3);
    const double s = g.uniform(0.0, 2.0);
    const auto level = enumerate_level(ifs, SubshiftKind::Invertible, n);
    std::vector<Word> words;
    std::vector<double> weights;
    double total = 0.0;
    for (const auto& e : level.entries) {
      words.push_back(e.word);
      weights.push_back(g.uniform(0.0, 1.0));
      total += weights.back();
    }
    for (double& w : weights) w /= total;
    const auto mu = CylinderMeasure::custom(SubshiftKind::Invertible, words, weights);
    const auto d = measure_diagnostics(ifs, mu, s);
    REQUIRE(d.jensen_holds);
    if (i % 10 == 0) {
      const auto gibbs = gibbs_weights(ifs, s, n);
      const auto e = measure_diagnostics(ifs, gibbs, s);
      REQUIRE(std::abs(e.entropy_rate + e.energy_rate - e.level_pressure) <= 1e-9);
    }
  }
}

TEST_CASE("joint spectral radius brackets tighten with depth") {
  Gen g(9);
  for (int i = 0; i < 500; ++i) {
    const auto ifs = g.tuple(g.integer(1, 3));
    JsrBounds prev = jsr_bounds(ifs, 1);
    for (int n = 2; n <= 5; ++n) {
      const auto b = jsr_bounds(ifs, n);
      REQUIRE(b.upper <= prev.upper + 1e-15);
      REQUIRE(b.lower >= prev.lower - 1e-15);
      prev = b;
    }
  }
}

TEST_CASE("domination certificates re-verify at double density and depth") {
  Gen g(10);
  int certified = 0;
  for (int i = 0; i < 200; ++i) {
    const auto ifs = AffineIFS::from_matrices({g.contraction(), g.contraction()});
    const auto cert = find_domination_certificate(ifs);
    if (!cert) continue;
    ++certified;
    const DominationSearchConfig config;
    REQUIRE(observed_cone_ratio(ifs, *cert, config.verify_depth + 2, 2 * config.grid_points) >= cert->kappa);
    REQUIRE(jsr_bounds(ifs, 4).lower > 0.0);
  }
  CHECK(certified > 10);
}

TEST_CASE("reducibility witnesses are invariant lines") {
  Gen g(11);
  for (int i = 0; i < 1000; ++i) {
    const double angle = g.uniform(0.0, 3.14);
    // Upper triangular in a rotated basis shares the line at `angle`.
    const Mat2 r = Mat2::rotation(angle);
    std::vector<Mat2> ms;
    for (int k = 0; k < 2; ++k) ms.push_back(r * Mat2{g.uniform(0.1, 0.5), g.uniform(-0.5, 0.5), 0, g.uniform(0.1, 0.5)} * r.transpose());
    const auto res = is_irreducible(AffineIFS::from_matrices(ms));
    REQUIRE_FALSE(res.irreducible);
    REQUIRE(res.common_line);
    for (const auto& m : ms) REQUIRE(Direction::of(m * res.common_line->unit()).distance(*res.common_line) <= 1e-9);
  }
  for (int i = 0; i < 100; ++i) {
    const auto ifs = AffineIFS::from_matrices({Mat2::rotation(g.uniform(0.3, 2.8)) * 0.5, g.positive()});
    if (is_irreducible(ifs).irreducible) REQUIRE(irreducibility_delta(ifs) > 0.0);
  }
}

TEST_CASE("full and sigma clouds differ only near frozen points") {
  const AffineIFS ifs({{{0, 0.6, 0, 0}, {0.3, 0.1}, std::nullopt},
                       {Mat2::diag(0.2, 0.6), {0, 0.4}, std::nullopt},
                       {Mat2::diag(0.5, 0.3), {0.5, 0}, std::nullopt}});
  const double eps = 1.0 / 64;
  const auto full = attractor_cloud(ifs, SubshiftKind::Full, eps);
  const auto sigma = attractor_cloud(ifs, SubshiftKind::Sigma, eps);
  std::vector<Vec2> frozen;
  for (const auto& e : enumerate_level(ifs, SubshiftKind::Full, 6).entries) {
    if (e.product == Mat2::zero()) frozen.push_back(canonical_point(ifs, e.word));
  }
  for (const auto& p : full.points) {
    double to_sigma = 1e300, to_frozen = 1e300;
    for (const auto& q : sigma.points) to_sigma = std::min(to_sigma, (p - q).norm());
    if (to_sigma <= 2 * eps) continue;
    for (const auto& q : frozen) to_frozen = std::min(to_frozen, (p - q).norm());
    REQUIRE(to_frozen <= eps);
  }
}

TEST_CASE("projections never exceed the planar box dimension") {
  const AffineIFS ifs({{{0.4, 0.1, 0.1, 0.3}, {0, 0}, std::nullopt},
                       {{0.3, 0.1, 0.2, 0.4}, {1, 0}, std::nullopt},
                       {{0.2, 0.2, 0.2, 0.2}, {0, 1}, std::nullopt}});
  const auto cloud = attractor_cloud(ifs, SubshiftKind::Full, std::ldexp(1.0, -10));
  const auto scales = dyadic_scales(3, 7);
  const double plane = box_dimension(cloud, scales, 1).slope;
  for (int k = 0; k < 16; ++k) {
    const auto proj = project_cloud(cloud, Direction(std::numbers::pi * k / 16));
    REQUIRE(box_dimension(proj, scales, 1).slope <= plane + 0.1);
  }
}
