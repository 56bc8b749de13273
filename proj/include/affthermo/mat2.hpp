#pragma once

// Closed-form 2x2 linear algebra used throughout the library: singular
// values, the singular value function, rank decisions, rank-one
// factorisations and proximality. Everything here is a pure function on
// small value types.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affthermo {

/// Relative tolerance used for rank decisions unless a caller overrides it.
inline constexpr double kDefaultRankTolerance = 1e-10;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {k * x, k * y}; }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  /// z-component of the 3-d cross product.
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

/// Real 2x2 matrix, row-major: [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 zero() { return {}; }
  static constexpr Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }
  static Mat2 rotation(double angle) {
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    return {cs, -sn, sn, cs};
  }

  constexpr Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
            c * o.b + d * o.d};
  }
  constexpr Mat2 operator+(const Mat2& o) const {
    return {a + o.a, b + o.b, c + o.c, d + o.d};
  }
  constexpr Mat2 operator-(const Mat2& o) const {
    return {a - o.a, b - o.b, c - o.c, d - o.d};
  }
  constexpr Mat2 operator*(double k) const { return {k * a, k * b, k * c, k * d}; }
  constexpr Vec2 operator*(Vec2 v) const {
    return {a * v.x + b * v.y, c * v.x + d * v.y};
  }
  constexpr bool operator==(const Mat2&) const = default;

  constexpr Mat2 transpose() const { return {a, c, b, d}; }
  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  double max_abs() const {
    return std::max(std::max(std::abs(a), std::abs(b)),
                    std::max(std::abs(c), std::abs(d)));
  }
  double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }
};

struct SingularValues {
  double first = 0.0;   ///< alpha_1, the operator norm
  double second = 0.0;  ///< alpha_2 <= alpha_1
};

/// Singular values from the closed form alpha_{1,2} = |Q +- R| with
/// Q = |(a+d, c-b)|/2 and R = |(a-d, c+b)|/2; no iterative SVD.
SingularValues singular_values(const Mat2& m);

/// Operator norm, i.e. the largest singular value.
inline double op_norm(const Mat2& m) { return singular_values(m).first; }

/// Singular value function phi^s with the convention 0^0 = 1.
/// Throws PreconditionError for s < 0.
double svf_phi(const Mat2& m, double s);

/// phi^s evaluated from alpha_1 and |det| (alpha_2 = |det| / alpha_1). Used
/// for long products where the determinant is tracked multiplicatively.
double svf_phi(double alpha1, double abs_det, double s);

/// log phi^s from alpha_1 and |det|; -infinity when phi^s = 0.
double log_svf_phi(double alpha1, double abs_det, double s);

/// Rank in {0,1,2}: 0 iff every entry is within tol of zero, otherwise the
/// number of singular values exceeding tol * alpha_1.
int rank(const Mat2& m, double tol = kDefaultRankTolerance);

/// A line through the origin, stored as an angle in [0, pi).
class Direction {
 public:
  constexpr Direction() = default;
  explicit Direction(double angle);

  static Direction of(Vec2 v) { return Direction(std::atan2(v.y, v.x)); }
  static Direction orthogonal_to(Vec2 v) { return Direction(std::atan2(v.y, v.x) + std::numbers::pi / 2); }

  double angle() const { return angle_; }
  Vec2 unit() const { return {std::cos(angle_), std::sin(angle_)}; }
  Direction perpendicular() const { return Direction(angle_ + std::numbers::pi / 2); }

  /// Distance in the projective line, in [0, pi/2].
  double distance(Direction o) const;
  bool approx_equal(Direction o, double tol = 1e-12) const { return distance(o) <= tol; }
  bool operator==(const Direction& o) const { return approx_equal(o); }

 private:
  double angle_ = 0.0;
};

/// Reduces an angle modulo pi into [0, pi).
double wrap_pi(double angle);

/// A = v w^T together with its projection form.
struct RankOneForm {
  Vec2 v;
  Vec2 w;
  bool nilpotent = false;
  /// <v,w> when not nilpotent, |v||w| when nilpotent.
  double scale = 0.0;
  Direction kernel_line;
  Direction image_line;
  /// Signed angle of the rotation R with R(w/|w|) = v/|v|; only set when
  /// nilpotent.
  std::optional<double> rotation_angle;

  Mat2 reconstruct() const { return {v.x * w.x, v.x * w.y, v.y * w.x, v.y * w.y}; }
};

/// Factor a rank-one matrix. Throws PreconditionError("RankError") when the
/// rank is not one.
RankOneForm rank_one_factor(const Mat2& m, double tol = kDefaultRankTolerance);

/// Orthogonal projection onto a line, as a matrix.
Mat2 projection_onto(Direction line);

/// Oblique projection onto `image` along `kernel` (the two lines must differ).
Mat2 projection_along(Direction image, Direction kernel);

/// True iff the invertible matrix has two real eigenvalues of different
/// modulus. Throws PreconditionError("RankError") for singular input.
bool is_proximal(const Mat2& m, double tol = kDefaultRankTolerance);

/// Largest eigenvalue modulus.
double spectral_radius(const Mat2& m);

/// Real eigendirections (zero, one or two of them). Scalar matrices return
/// none, as every line is invariant.
std::vector<Direction> eigen_directions(const Mat2& m, double tol = kDefaultRankTolerance);

/// True iff the matrix is a scalar multiple of an orthogonal matrix.
bool is_conformal(const Mat2& m, double tol = kDefaultRankTolerance);

/// True iff the matrix maps the line into itself (or annihilates it).
bool preserves_line(const Mat2& m, Direction line, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Exact rational matrices, used when an input document gives "p/q" entries.

using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", an integer, or a finite decimal like "-0.25" exactly.
/// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);
double to_double(const Rational& r);

struct ExactMat2 {
  Rational a, b, c, d;

  ExactMat2 operator*(const ExactMat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
            c * o.b + d * o.d};
  }
  bool operator==(const ExactMat2&) const = default;

  Rational det() const { return a * d - b * c; }
  Rational trace() const { return a + d; }
  bool is_zero() const { return a == 0 && b == 0 && c == 0 && d == 0; }
  bool is_scalar() const { return b == 0 && c == 0 && a == d; }
  int rank() const;
  Mat2 to_double() const;
};

}  // namespace affthermo
