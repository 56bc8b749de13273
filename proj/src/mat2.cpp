#include "affthermo/mat2.hpp"

#include "affthermo/errors.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>

namespace affthermo {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

SingularValues singular_values(const Mat2& m) {
  const double e = 0.5 * (m.a + m.d);
  const double f = 0.5 * (m.a - m.d);
  const double g = 0.5 * (m.c + m.b);
  const double h = 0.5 * (m.c - m.b);
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  return {q + r, std::abs(q - r)};
}

double svf_phi(const Mat2& m, double s) {
  if (!(s >= 0.0)) {
    throw PreconditionError("mat2", "DomainError",
                            "singular value function needs s >= 0");
  }
  const auto sv = singular_values(m);
  return svf_phi(sv.first, std::abs(m.det()), s);
}

double svf_phi(double alpha1, double abs_det, double s) {
  if (s == 0.0) return 1.0;  // 0^0 = 1
  if (alpha1 <= 0.0) return 0.0;
  if (s <= 1.0) return std::pow(alpha1, s);
  if (abs_det <= 0.0) return 0.0;
  if (s <= 2.0) return std::pow(alpha1, 2.0 - s) * std::pow(abs_det, s - 1.0);
  return std::pow(abs_det, 0.5 * s);
}

double log_svf_phi(double alpha1, double abs_det, double s) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (s == 0.0) return 0.0;
  if (alpha1 <= 0.0) return kNegInf;
  if (s <= 1.0) return s * std::log(alpha1);
  if (abs_det <= 0.0) return kNegInf;
  if (s <= 2.0) return (2.0 - s) * std::log(alpha1) + (s - 1.0) * std::log(abs_det);
  return 0.5 * s * std::log(abs_det);
}

int rank(const Mat2& m, double tol) {
  if (m.max_abs() <= tol) return 0;
  const auto sv = singular_values(m);
  // alpha_2 from |det| / alpha_1 keeps relative accuracy for tiny alpha_2.
  const double second = std::abs(m.det()) / sv.first;
  return second > tol * sv.first ? 2 : 1;
}

double wrap_pi(double angle) {
  double r = std::fmod(angle, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r -= kPi;
  return r;
}

Direction::Direction(double angle) : angle_(wrap_pi(angle)) {}

double Direction::distance(Direction o) const {
  const double d = std::abs(angle_ - o.angle_);
  return std::min(d, kPi - d);
}

RankOneForm rank_one_factor(const Mat2& m, double tol) {
  if (rank(m, tol) != 1) {
    throw PreconditionError("mat2", "RankError",
                            "rank_one_factor requires a rank-one matrix");
  }
  const Vec2 col0{m.a, m.c};
  const Vec2 col1{m.b, m.d};
  const Vec2 dominant = col1.norm() > col0.norm() ? col1 : col0;
  const Vec2 u = dominant * (1.0 / dominant.norm());
  const Vec2 row = m.transpose() * u;  // m = u row^T
  const double alpha1 = row.norm();
  const double root = std::sqrt(alpha1);

  RankOneForm f;
  f.v = u * root;
  f.w = row * (1.0 / root);
  const double inner = f.v.dot(f.w);
  f.nilpotent = std::abs(inner) <= tol * alpha1;
  f.scale = f.nilpotent ? alpha1 : inner;
  f.image_line = Direction::of(f.v);
  f.kernel_line = Direction::orthogonal_to(f.w);
  if (f.nilpotent) {
    const Vec2 wu = f.w * (1.0 / f.w.norm());
    f.rotation_angle = std::atan2(wu.cross(u), wu.dot(u));
  }
  return f;
}

Mat2 projection_onto(Direction line) {
  const Vec2 u = line.unit();
  return {u.x * u.x, u.x * u.y, u.y * u.x, u.y * u.y};
}

Mat2 projection_along(Direction image, Direction kernel) {
  // P x = <x, n> / <v, n> v, with v spanning the image and n normal to the kernel.
  const Vec2 v = image.unit();
  const Vec2 n = kernel.perpendicular().unit();
  const double k = 1.0 / v.dot(n);
  return Mat2{v.x * n.x, v.x * n.y, v.y * n.x, v.y * n.y} * k;
}

bool is_proximal(const Mat2& m, double tol) {
  if (rank(m, tol) != 2) {
    throw PreconditionError("mat2", "RankError",
                            "proximality is defined for invertible matrices");
  }
  const double tr = m.trace();
  const double det = m.det();
  const double disc = tr * tr - 4.0 * det;
  const double scale = tr * tr + 4.0 * std::abs(det);
  return disc > tol * scale && std::abs(tr) > tol * op_norm(m);
}

double spectral_radius(const Mat2& m) {
  const double half_tr = 0.5 * m.trace();
  const double det = m.det();
  const double disc = half_tr * half_tr - det;
  if (disc < 0.0) return std::sqrt(det);
  const double root = std::sqrt(disc);
  return std::abs(half_tr) + root;
}

std::vector<Direction> eigen_directions(const Mat2& m, double tol) {
  const double scale = m.max_abs();
  if (scale == 0.0) return {};
  if (std::abs(m.b) <= tol * scale && std::abs(m.c) <= tol * scale &&
      std::abs(m.a - m.d) <= tol * scale) {
    return {};
  }
  const double diff = m.a - m.d;
  const double disc = diff * diff + 4.0 * m.b * m.c;
  const double s2 = scale * scale;
  if (disc < -tol * s2) return {};

  auto direction_for = [&](double lambda) {
    const Vec2 r0{m.b, lambda - m.a};
    const Vec2 r1{lambda - m.d, m.c};
    return Direction::of(r0.norm() >= r1.norm() ? r0 : r1);
  };
  const double tr = m.trace();
  if (disc <= tol * s2) return {direction_for(0.5 * tr)};
  const double root = std::sqrt(disc);
  Direction d1 = direction_for(0.5 * (tr + root));
  Direction d2 = direction_for(0.5 * (tr - root));
  if (d1.approx_equal(d2, 1e-12)) return {d1};
  return {d1, d2};
}

bool is_conformal(const Mat2& m, double tol) {
  const auto sv = singular_values(m);
  return sv.first - sv.second <= tol * sv.first;
}

bool preserves_line(const Mat2& m, Direction line, double tol) {
  const Vec2 u = line.unit();
  const Vec2 image = m * u;
  const double len = image.norm();
  if (len <= tol * std::max(op_norm(m), std::numeric_limits<double>::min())) return true;
  return std::abs(u.cross(image)) <= tol * len;
}

// ---------------------------------------------------------------------------

Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto parse_integer = [](std::string_view s) {
    using boost::multiprecision::cpp_int;
    if (s.empty()) throw std::invalid_argument("empty integer");
    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    if (s.empty()) throw std::invalid_argument("missing digits");
    cpp_int value = 0;
    for (char ch : s) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) {
        throw std::invalid_argument("invalid digit in '" + std::string(s) + "'");
      }
      value = value * 10 + (ch - '0');
    }
    return negative ? cpp_int(-value) : value;
  };

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_integer(trim(text.substr(0, slash)));
    const auto den = parse_integer(trim(text.substr(slash + 1)));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string digits(text.substr(0, dot));
    const auto frac = text.substr(dot + 1);
    if (frac.empty() || frac.find_first_of("+-") != std::string_view::npos) {
      throw std::invalid_argument("malformed decimal '" + std::string(text) + "'");
    }
    digits += frac;
    if (digits == "-" || digits == "+" || digits.empty()) digits += "0";
    boost::multiprecision::cpp_int den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    return Rational(parse_integer(digits), den);
  }
  return Rational(parse_integer(text));
}

std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

int ExactMat2::rank() const {
  if (is_zero()) return 0;
  return det() == 0 ? 1 : 2;
}

Mat2 ExactMat2::to_double() const {
  return {affthermo::to_double(a), affthermo::to_double(b), affthermo::to_double(c),
          affthermo::to_double(d)};
}

}  // namespace affthermo
