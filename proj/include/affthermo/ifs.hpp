#pragma once

#include "affthermo/mat2.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affthermo {

/// Which shift-invariant set of infinite words an analysis runs over.
enum class SubshiftKind {
  Full,        ///< every word over the alphabet
  Sigma,       ///< words whose prefix products are all non-zero
  Invertible,  ///< words over the invertible letters only
};

std::string_view to_string(SubshiftKind kind);
/// Accepts "full", "sigma", "invertible" (case-insensitive).
std::optional<SubshiftKind> parse_subshift_kind(std::string_view text);

using Letter = std::uint8_t;

/// Finite word over the alphabet {0, ..., #J-1}.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Letter> letters) : letters_(letters) {}
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}
  explicit Word(std::span<const Letter> letters) : letters_(letters.begin(), letters.end()) {}

  /// Parses a digit string such as "0111"; letters above 9 need the
  /// comma-separated form "10,2,3".
  static Word parse(std::string_view text);

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  std::span<const Letter> letters() const { return letters_; }

  Word operator+(const Word& tail) const;
  Word prefix(std::size_t n) const;
  void push_back(Letter l) { letters_.push_back(l); }

  auto operator<=>(const Word&) const = default;
  bool operator==(const Word&) const = default;

  std::string to_string() const;

 private:
  std::vector<Letter> letters_;
};

/// x -> linear * x + translation.
struct AffineMap {
  Mat2 linear;
  Vec2 translation;
  /// Exact entries, present when the map was given with rational entries.
  std::optional<ExactMat2> exact;

  Vec2 operator()(Vec2 x) const { return linear * x + translation; }
};

/// An ordered tuple of affine maps of the plane. Every analysis in the
/// library consumes one of these; pure matrix analyses ignore translations.
class AffineIFS {
 public:
  AffineIFS() = default;
  explicit AffineIFS(std::vector<AffineMap> maps, std::string name = {},
                     double rank_tolerance = kDefaultRankTolerance);

  /// Tuple of matrices with zero translations.
  static AffineIFS from_matrices(const std::vector<Mat2>& matrices, std::string name = {});

  const std::string& name() const { return name_; }
  std::size_t size() const { return maps_.size(); }
  const std::vector<AffineMap>& maps() const { return maps_; }
  const AffineMap& map(std::size_t i) const { return maps_[i]; }
  const Mat2& matrix(std::size_t i) const { return maps_[i].linear; }
  std::vector<Mat2> matrices() const;
  double rank_tolerance() const { return rank_tolerance_; }

  /// Letter ranks, computed exactly when rational entries are available.
  int letter_rank(std::size_t i) const { return ranks_[i]; }
  double letter_norm(std::size_t i) const { return norms_[i]; }
  std::vector<Letter> invertible_letters() const;
  std::vector<Letter> rank_one_letters() const;
  std::vector<Letter> zero_letters() const;
  bool contains_rank_one() const { return !rank_one_letters().empty(); }
  bool contains_invertible() const { return !invertible_letters().empty(); }
  /// True iff every matrix entry was given as an exact rational.
  bool is_exact() const;

  double max_norm() const;
  bool is_contractive() const { return max_norm() < 1.0; }

  /// Radius of a ball centred at the origin that contains the attractor:
  /// max |v_i| / (1 - max ||A_i||). Requires contractivity.
  double ball_radius() const;

  /// True iff all maps share a fixed point (only meaningful for contractive
  /// maps with invertible I - A_i).
  bool has_common_fixed_point(double tol = 1e-12) const;

  /// Same linear parts, new translations.
  AffineIFS with_translations(const std::vector<Vec2>& translations) const;
  /// Sub-system on the given letters (order preserved).
  AffineIFS restricted_to(std::span<const Letter> letters) const;
  /// All matrices multiplied by a common factor.
  AffineIFS scaled(double factor) const;

 private:
  std::string name_;
  std::vector<AffineMap> maps_;
  std::vector<int> ranks_;
  std::vector<double> norms_;
  double rank_tolerance_ = kDefaultRankTolerance;
};

/// Node budget shared by enumerations; AFFTHERMO_BUDGET overrides the
/// default of 5e7 tree nodes.
std::uint64_t default_node_budget();

/// Worker cap for parallel tree walks (1 = serial). Set by the CLI.
void set_worker_threads(unsigned n);
unsigned worker_threads();

/// Runs task(0), ..., task(count - 1) on up to worker_threads() threads.
/// The first exception (by index) is rethrown after all tasks finish.
void run_sharded(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace affthermo
