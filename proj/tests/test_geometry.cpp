#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affthermo/cloud_io.hpp"
#include "affthermo/errors.hpp"
#include "affthermo/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace affthermo;

namespace {

AffineIFS sierpinski() {
  const Mat2 half = Mat2::identity() * 0.5;
  return AffineIFS({{half, {0, 0}, std::nullopt}, {half, {0.5, 0}, std::nullopt}, {half, {0, 0.5}, std::nullopt}});
}

AffineIFS mixed() {
  return AffineIFS({{{0.4, 0.1, 0.1, 0.3}, {0, 0}, std::nullopt},
                    {{0.3, 0.1, 0.2, 0.4}, {1, 0}, std::nullopt},
                    {{0.2, 0.2, 0.2, 0.2}, {0, 1}, std::nullopt}});
}

bool within(const std::vector<Vec2>& a, const std::vector<Vec2>& b, double tol) {
  for (const auto& p : a) {
    double best = 1e300;
    for (const auto& q : b) best = std::min(best, (p - q).norm());
    if (best > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("a single contraction collapses to its fixed point") {
  const AffineIFS one({{Mat2::identity() * 0.5, {1, 0}, std::nullopt}});
  const auto cloud = attractor_cloud(one, SubshiftKind::Full, 1e-3);
  REQUIRE(!cloud.points.empty());
  for (const auto& p : cloud.points) CHECK((p - Vec2{2, 0}).norm() <= 1e-3);
  CHECK((canonical_point(one, Word(std::vector<Letter>(40, 0))) - Vec2{2, 0}).norm() < 1e-11);
  CHECK(canonical_point(one, Word{}) == Vec2{0, 0});
}

TEST_CASE("a zero letter freezes the canonical point") {
  const AffineIFS ifs({{Mat2::diag(0.5, 0.3), {1, 0}, std::nullopt}, {Mat2::zero(), {0, 2}, std::nullopt}});
  const Vec2 p = canonical_point(ifs, Word::parse("01"));
  CHECK(canonical_point(ifs, Word::parse("0100")) == p);
  CHECK(canonical_point(ifs, Word::parse("01011")) == p);
}

TEST_CASE("nesting of the three attractors") {
  const auto ifs = mixed();
  const double eps = 1.0 / 64;
  const auto x = attractor_cloud(ifs, SubshiftKind::Invertible, eps);
  const auto xs = attractor_cloud(ifs, SubshiftKind::Sigma, eps);
  const auto xf = attractor_cloud(ifs, SubshiftKind::Full, eps);
  CHECK(within(x.points, xs.points, 2 * eps));
  CHECK(within(xs.points, xf.points, 2 * eps));
  CHECK(x.source == SourceSet::X);
  CHECK(xf.source == SourceSet::Xprime);
}

TEST_CASE("self-affinity residual of the full cloud") {
  const auto ifs = mixed();
  const double eps = 1.0 / 128;
  const auto cloud = attractor_cloud(ifs, SubshiftKind::Full, eps);
  std::vector<Vec2> image;
  for (const auto& m : ifs.maps()) {
    for (const auto& p : cloud.points) image.push_back(m(p));
  }
  CHECK(hausdorff_distance(cloud.points, image) <= 2 * eps);
}

TEST_CASE("condensation preconditions") {
  CHECK_THROWS_AS(condensation_decomposition(sierpinski(), 0.01), PreconditionError);
  const AffineIFS singular({{{1, 2, 2, 4}, {0, 0}, std::nullopt}});
  CHECK_THROWS_AS(condensation_decomposition(AffineIFS({{Mat2{0.1, 0.2, 0.2, 0.4}, {0, 0}, std::nullopt}}), 0.01),
                  PreconditionError);
  CHECK_THROWS_AS(attractor_cloud(singular, SubshiftKind::Full, 0.01), PreconditionError);
}

TEST_CASE("projections") {
  PointCloud square;
  square.points = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto onto_x = project_cloud(square, Direction(0.0));
  CHECK(onto_x.values == std::vector<double>{0.0, 1.0});

  const auto cloud = attractor_cloud(mixed(), SubshiftKind::Full, 1.0 / 32);
  const double theta = 0.7;
  const auto a = project_cloud(cloud, Direction(theta));
  const auto b = project_cloud(cloud, Direction(theta + std::numbers::pi));
  auto flipped = b.values;
  for (double& v : flipped) v = -v;
  std::sort(flipped.begin(), flipped.end());
  REQUIRE(a.values.size() == b.values.size());
  double same = 0.0, opposite = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    same = std::max(same, std::abs(a.values[i] - b.values[i]));
    opposite = std::max(opposite, std::abs(a.values[i] - flipped[i]));
  }
  CHECK(std::min(same, opposite) < 1e-12);
}

TEST_CASE("box counting oracles") {
  const auto scales = dyadic_scales(3, 8);
  PointCloud point;
  point.points = {{0.3, 0.3}};
  CHECK(std::abs(box_dimension(point, scales, 1).slope) <= 0.05);

  PointCloud square;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) square.points.push_back({u(rng), u(rng)});
  CHECK(box_dimension(square, dyadic_scales(1, 5), 1).slope == doctest::Approx(2.0).epsilon(0.05));

  const auto gasket = attractor_cloud(sierpinski(), SubshiftKind::Full, std::ldexp(1.0, -11));
  const auto est = box_dimension(gasket, scales, 3);
  CHECK(std::abs(est.slope - std::log(3.0) / std::log(2.0)) <= 0.05);
  CHECK(est.table.size() == scales.size() * 5);

  PointCloud coarse = gasket;
  coarse.resolution = 0.1;
  CHECK_THROWS_AS(box_dimension(coarse, scales), PreconditionError);
}

TEST_CASE("cloud round trips") {
  auto cloud = attractor_cloud(sierpinski(), SubshiftKind::Full, 1.0 / 16);
  std::stringstream bin;
  write_cloud_binary(bin, cloud);
  const auto back = read_cloud_binary(bin);
  CHECK(back.points == cloud.points);
  CHECK(back.resolution == cloud.resolution);
  CHECK(back.source == cloud.source);
  CHECK(bin.str().substr(0, 5) == "AFPC1");

  std::stringstream csv;
  write_cloud_csv(csv, cloud);
  CHECK(read_cloud_csv(csv).points == cloud.points);
}
