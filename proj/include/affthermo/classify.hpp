#pragma once

// Structural classification of a matrix tuple: irreducibility, domination
// (strongly invariant multicones and the cone constant kappa), strict
// affinity, joint spectral radius brackets and continuity predictions for
// the pressure at 0 and at 1.

#include "affthermo/ifs.hpp"
#include "affthermo/symbolic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace affthermo {

/// Closed projective interval [start, start + width] taken mod pi, with
/// 0 <= width < pi.
struct ProjectiveInterval {
  double start = 0.0;
  double width = 0.0;

  double end() const { return wrap_pi(start + width); }
  /// True iff the angle lies in the interval shrunk by `margin` on both ends
  /// (a negative margin enlarges it).
  bool contains(double angle, double margin = 0.0) const;
  double midpoint() const { return wrap_pi(start + 0.5 * width); }
};

using Multicone = std::vector<ProjectiveInterval>;

struct DominationCertificate {
  Multicone multicone;
  /// Floor for ||A_w|V|| / ||A_w|| valid for every non-empty word w and every
  /// line V in the image cone C0 = union of A_i(multicone).
  double kappa = 0.0;
  int verified_depth = 0;
  /// Smallest ratio actually observed on a direction grid of C0 at
  /// verified_depth; always >= kappa.
  double observed_ratio = 0.0;
};

struct DominationSearchConfig {
  int orbit_depth = 10;
  std::size_t max_orbit_points = 4096;
  std::size_t max_intervals = 8;
  int verify_depth = 6;
  int grid_points = 1000;
  /// Outward rounding applied to every computed endpoint.
  double rounding_slack = 1e-12;
  std::uint64_t verify_node_budget = 2'000'000;
};

/// Checks strict invariance of a multicone. Returns a certificate with the
/// analytic kappa floor, or nullopt if some letter fails to map the
/// multicone into its interior. Throws PreconditionError("RankZeroLetter").
std::optional<DominationCertificate> certify_multicone(const AffineIFS& ifs, Multicone multicone,
                                                       const DominationSearchConfig& config = {});

/// Searches for a strongly invariant multicone: the two coordinate
/// quadrants first, then inflated clusters of the projective orbit.
/// nullopt means Inconclusive. Throws PreconditionError("RankZeroLetter").
std::optional<DominationCertificate> find_domination_certificate(
    const AffineIFS& ifs, const DominationSearchConfig& config = {});

/// Smallest ||A_w|V|| / ||A_w|| over a grid of `grid_points` lines of the
/// image cone and all words of length 1..depth.
double observed_cone_ratio(const AffineIFS& ifs, const DominationCertificate& cert, int depth,
                           int grid_points, std::uint64_t node_budget = 2'000'000);

/// Image cone C0: the union of the letters' images of the multicone.
Multicone image_cone(const AffineIFS& ifs, const Multicone& multicone);

struct IrreducibilityResult {
  bool irreducible = false;
  /// A common invariant line when reducible.
  std::optional<Direction> common_line;
  /// True when decided in exact rational arithmetic.
  bool exact = false;
};

/// Decides whether the letters share an invariant line.
IrreducibilityResult is_irreducible(const AffineIFS& ifs);

/// Every line invariant under all letters among the candidate lines of the
/// first letter that does not fix every line (at most two). When every letter
/// fixes every line, returns the two coordinate axes.
std::vector<Direction> common_invariant_lines(const AffineIFS& ifs);

/// min over a unit-circle grid of max_i |A_i x|; positive for irreducible
/// tuples.
double irreducibility_delta(const AffineIFS& ifs, int grid_points = 3600);

struct StrictAffinityResult {
  /// Shortest (then lexicographically first) word of invertible letters with
  /// proximal product; indices refer to the full alphabet.
  std::optional<Word> witness;
  int searched_depth = 0;
};

/// Throws PreconditionError("NoInvertibleLetters").
StrictAffinityResult is_strictly_affine(const AffineIFS& ifs, int max_depth,
                                        std::uint64_t node_budget = default_node_budget());

struct JsrBounds {
  double lower = 0.0;
  double upper = 0.0;
  int depth = 0;
  Word lower_witness;
};

/// lower = max over |w| <= n of rho(A_w)^(1/|w|); upper = min over k <= n of
/// (max_{|w|=k} ||A_w||)^(1/k). Throws BudgetExceeded.
JsrBounds jsr_bounds(const AffineIFS& ifs, int n, std::uint64_t node_budget = default_node_budget());

enum class Prediction { Continuous, Discontinuous, Unavailable };
std::string_view to_string(Prediction p);

struct ContinuityPrediction {
  Prediction value = Prediction::Unavailable;
  std::string reason;
};

struct ClassifyConfig {
  int automaton_depth = 64;
  AutomatonConfig automaton;
  DominationSearchConfig domination;
  int strict_affinity_depth = 6;
  int jsr_depth = 8;
  std::uint64_t node_budget = default_node_budget();
};

struct TupleClassification {
  std::vector<int> rank_profile;
  bool contains_zero = false;
  bool contains_rank_one = false;
  bool contains_invertible = false;
  bool contractive = false;
  IrreducibilityResult irreducibility;
  std::optional<DominationCertificate> domination;
  /// Only ever established through dominated + irreducible + all invertible.
  bool strongly_irreducible = false;
  std::optional<Word> strictly_affine_witness;
  NonzeroWordResult nonzero_word;
  ZeroProductResult zero_product;
  std::optional<JsrBounds> jsr;
  bool conformal = false;
  ContinuityPrediction continuity_at_zero;
  ContinuityPrediction continuity_at_one;
};

TupleClassification classify(const AffineIFS& ifs, const ClassifyConfig& config = {});

/// Machine-readable "key: value" report, one entry per line.
std::string format_report(const TupleClassification& c, const AffineIFS& ifs);

/// True iff every letter is a scalar multiple of an orthogonal matrix.
bool is_conformal_tuple(const AffineIFS& ifs);

}  // namespace affthermo
