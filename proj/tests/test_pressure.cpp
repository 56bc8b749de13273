#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affthermo/errors.hpp"
#include "affthermo/pressure.hpp"
#include "affthermo/symbolic.hpp"

#include <cmath>
#include <numbers>

using namespace affthermo;

namespace {

AffineIFS tuple(std::vector<Mat2> m) { return AffineIFS::from_matrices(m); }
AffineIFS diag_identity() { return tuple({Mat2::diag(1, 0), Mat2::identity()}); }
AffineIFS sigma_example() { return tuple({{0, 1, 0, 0}, Mat2::diag(0, 1)}); }
AffineIFS gap_tuple() { return tuple({{0.4, 0.1, 0.1, 0.3}, {0.3, 0.1, 0.2, 0.4}, {0.2, 0.2, 0.2, 0.2}}); }

AffineIFS similarities(int count, double ratio) {
  std::vector<AffineMap> maps;
  for (int i = 0; i < count; ++i) maps.push_back({Mat2::identity() * ratio, {double(i), 0.0}, std::nullopt});
  return AffineIFS(maps);
}

}  // namespace

TEST_CASE("log-sum accumulation") {
  LogSum sum;
  CHECK(sum.value() == -std::numeric_limits<double>::infinity());
  for (int i = 0; i < 1000; ++i) sum.add_log(-800.0);
  CHECK(sum.value() == doctest::Approx(-800.0 + std::log(1000.0)).epsilon(1e-14));
}

TEST_CASE("the diagonal/identity pair has closed-form pressure") {
  const auto ifs = diag_identity();
  for (int n = 1; n <= 12; ++n) {
    const auto one = pressure_estimate(ifs, SubshiftKind::Full, 1.0, n);
    CHECK(one.lower == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(one.upper == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    for (double s : {1.25, 1.5, 2.0}) {
      const auto e = pressure_estimate(ifs, SubshiftKind::Full, s, n);
      CHECK(e.lower == 0.0);
      CHECK(e.upper == 0.0);
    }
  }
}

TEST_CASE("zero exponent") {
  const auto ifs = gap_tuple();
  const auto e = pressure_estimate(ifs, SubshiftKind::Full, 0.0, 3);
  CHECK(e.exact());
  CHECK(e.upper == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(pressure_dispatch(ifs, 0.0, 2).upper == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(pressure_estimate(ifs, SubshiftKind::Invertible, 0.0, 2).upper ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("no invertible letter above one") {
  const auto e = pressure_dispatch(sigma_example(), 1.5, 6);
  CHECK(e.upper == -std::numeric_limits<double>::infinity());
  CHECK(e.lower == -std::numeric_limits<double>::infinity());
}

TEST_CASE("sigma sums run over the two surviving words") {
  const auto ifs = sigma_example();
  for (int n = 1; n <= 8; ++n) {
    CHECK(enumerate_level(ifs, SubshiftKind::Sigma, n).size() == 2);
    const auto e = pressure_dispatch(ifs, 0.5, n);
    // Both words have norm 1, so each level sum is exactly 2.
    CHECK(e.upper <= std::log(2.0) / n + 1e-12);
    CHECK(e.lower <= e.upper);
  }
}

TEST_CASE("bad inputs") {
  CHECK_THROWS_AS(pressure_estimate(gap_tuple(), SubshiftKind::Full, -1.0, 2), PreconditionError);
  CHECK_THROWS_AS(pressure_estimate(gap_tuple(), SubshiftKind::Full, 1.0, 0), PreconditionError);
  CHECK_THROWS_AS(pressure_estimate(gap_tuple(), SubshiftKind::Full, 0.5, 40, {.node_budget = 1000}),
                  BudgetExceeded);
}

TEST_CASE("dominated tuples get tight bounds") {
  const auto e = pressure_estimate(gap_tuple(), SubshiftKind::Invertible, 0.9, 6);
  CHECK(e.certificate.kind == CertificateKind::Domination);
  CHECK(e.lower <= e.upper);
  CHECK(e.upper - e.lower < 0.005);
}

TEST_CASE("affinity dimension of conformal systems") {
  const auto three = affinity_dimension(similarities(3, 0.5), SubshiftKind::Full, 1e-3);
  CHECK(three.lo <= std::log(3.0) / std::log(2.0));
  CHECK(three.hi >= std::log(3.0) / std::log(2.0));
  CHECK(three.hi - three.lo <= 1e-3);

  const auto one = affinity_dimension(similarities(1, 0.3), SubshiftKind::Full, 1e-3);
  CHECK(one.lo <= 0.0);
  CHECK(one.hi >= 0.0);

  const auto two = affinity_dimension(similarities(2, 0.5), SubshiftKind::Full, 1e-3);
  CHECK(two.lo <= 1.0);
  CHECK(two.hi >= 1.0);

  CHECK_THROWS_AS(affinity_dimension(diag_identity(), SubshiftKind::Full, 1e-3), PreconditionError);
}

TEST_CASE("pressure gap") {
  const auto g = pressure_gap(gap_tuple(), 1.0);
  CHECK(g.status == PressureGap::Status::CertifiedGap);
  CHECK(g.lower_full > g.upper_inv);
  CHECK(g.depth <= 14);

  const auto zero = pressure_gap(gap_tuple(), 0.0);
  CHECK(zero.status == PressureGap::Status::CertifiedGap);
  CHECK(zero.lower_full - zero.upper_inv == doctest::Approx(std::log(3.0) - std::log(2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(pressure_gap(similarities(2, 0.5), 1.0), PreconditionError);
  CHECK_THROWS_AS(pressure_gap(tuple({{0, 1, 0, 0}}), 1.0), PreconditionError);
  CHECK_THROWS_AS(pressure_gap(gap_tuple(), 1.5), PreconditionError);
}

TEST_CASE("Gibbs weights") {
  const auto two = gibbs_weights(similarities(2, 0.4), 0.7, 5);
  REQUIRE(two.weights.size() == 32);
  for (double w : two.weights) CHECK(w == doctest::Approx(1.0 / 32).epsilon(1e-12));

  const auto sigma = gibbs_weights(sigma_example(), 1.0, 4);
  REQUIRE(sigma.words.size() == 2);
  CHECK(sigma.words[0] == Word::parse("0111"));
  CHECK(sigma.words[1] == Word::parse("1111"));
  CHECK(sigma.weights[0] == doctest::Approx(0.5));
  CHECK(sigma.weights[1] == doctest::Approx(0.5));

  CHECK_THROWS_AS(gibbs_weights(tuple({{0, 1, 0, 0}}), 1.0, 3), PreconditionError);

  const auto q = quasi_multiplicativity(gap_tuple(), 1.0, 8);
  CHECK(q.min_ratio > 0.0);
  CHECK(q.max_ratio >= q.min_ratio);
}

TEST_CASE("measure diagnostics") {
  const auto ifs = similarities(2, 0.5);
  const auto uniform = measure_diagnostics(ifs, CylinderMeasure::uniform(ifs, SubshiftKind::Full, 1), 1.0);
  CHECK(uniform.entropy_rate == doctest::Approx(std::log(2.0)));

  const auto point = CylinderMeasure::custom(SubshiftKind::Full, {Word::parse("010")}, {1.0});
  const auto d = measure_diagnostics(ifs, point, 1.0);
  CHECK(d.entropy_rate == doctest::Approx(0.0));
  CHECK(d.energy_rate == doctest::Approx(std::log(0.5)));
  CHECK(d.jensen_holds);

  const auto gibbs = gibbs_weights(gap_tuple(), 0.8, 6);
  const auto g = measure_diagnostics(gap_tuple(), gibbs, 0.8);
  CHECK(std::abs(g.entropy_rate + g.energy_rate - g.level_pressure) <= 1e-9);

  CHECK_THROWS_AS(CylinderMeasure::custom(SubshiftKind::Full, {Word{0}}, {0.5}), PreconditionError);
}

TEST_CASE("pressure CSV") {
  std::ostringstream out;
  write_pressure_csv(out, pressure_curve(diag_identity(), SubshiftKind::Full, 1.0, 2.0, 3, 4));
  CHECK(out.str() ==
        "s,lower,upper,depth,certificate,kind\n"
        "1,0.69314718056,0.69314718056,4,line:angle=0,full\n"
        "1.5,0,0,4,conformal,full\n"
        "2,0,0,4,conformal,full\n");
}
