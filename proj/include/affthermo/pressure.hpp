#pragma once

// Subadditive pressure P(Gamma, A, s) with certified lower and upper bounds,
// the piecewise dispatch over the three word spaces, affinity dimension by
// bisection, pressure gaps between the full and the invertible shift, and
// finite-depth Gibbs weights with entropy and energy diagnostics.

#include "affthermo/classify.hpp"
#include "affthermo/errors.hpp"
#include "affthermo/ifs.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace affthermo {

/// Log of a sum of positive terms given by their logarithms. Terms are
/// rescaled against the running maximum and added with Neumaier
/// compensation; an empty sum is -infinity.
class LogSum {
 public:
  void add_log(double log_term);
  void merge(const LogSum& other);
  double value() const;
  bool empty() const { return reference_ == -kInf; }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  void rescale(double new_reference);
  double reference_ = -kInf;
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

enum class CertificateKind {
  None,
  Domination,     ///< kappa-supermultiplicativity of the level sums
  Conformal,      ///< every letter a similarity; lower = upper
  PeriodicOrbit,  ///< closed form along a periodic word
  InvariantLine,  ///< growth along a common invariant line
  Determinant,    ///< s >= 2, where phi^s is multiplicative; lower = upper
  ZeroExponent,   ///< s = 0 closed forms
};

std::string_view to_string(CertificateKind kind);

struct PressureCertificate {
  CertificateKind kind = CertificateKind::None;
  double kappa = 0.0;         ///< Domination
  Word orbit;                 ///< PeriodicOrbit
  std::optional<Direction> line;  ///< InvariantLine
};

std::string describe(const PressureCertificate& cert);

struct PressureEstimate {
  double s = 0.0;
  SubshiftKind kind = SubshiftKind::Full;
  int depth = 0;
  double upper = 0.0;  ///< may be -infinity
  double lower = 0.0;  ///< may be -infinity
  PressureCertificate certificate;

  bool exact() const { return lower == upper; }
};

struct PressureOptions {
  /// A certificate previously produced by classify; re-verified on use.
  std::optional<DominationCertificate> domination;
  /// Search for certificates (domination, invariant lines) automatically.
  bool auto_certify = true;
  std::uint64_t node_budget = default_node_budget();
  DominationSearchConfig domination_search;
};

/// Throws PreconditionError("DomainError") for s < 0 or n < 1,
/// PreconditionError("InvalidCertificate") and BudgetExceeded.
PressureEstimate pressure_estimate(const AffineIFS& ifs, SubshiftKind kind, double s, int n,
                                   const PressureOptions& options = {});

/// Full shift at s = 0, Sigma for 0 < s <= 1, Invertible for s > 1.
PressureEstimate pressure_dispatch(const AffineIFS& ifs, double s, int n,
                                   const PressureOptions& options = {});

/// Estimates on an evenly spaced grid of `steps` exponents (steps >= 1).
std::vector<PressureEstimate> pressure_curve(const AffineIFS& ifs, SubshiftKind kind, double s_from,
                                             double s_to, int steps, int n,
                                             const PressureOptions& options = {});

/// CSV with header "s,lower,upper,depth,certificate,kind".
void write_pressure_csv(std::ostream& out, const std::vector<PressureEstimate>& rows);

// ---------------------------------------------------------------------------

struct AffinityDimension {
  double lo = 0.0;
  double hi = 0.0;
  int depth = 0;  ///< deepest level used
  SubshiftKind kind = SubshiftKind::Full;
};

/// Raised when bisection cannot separate the bounds within the budget.
class InconclusiveBracket : public Error {
 public:
  InconclusiveBracket(AffinityDimension best, const std::string& detail)
      : Error(ErrorCategory::Budget, "pressure", "InconclusiveBracket", detail), best_(best) {}
  const AffinityDimension& best() const noexcept { return best_; }

 private:
  AffinityDimension best_;
};

struct AffinityOptions {
  int initial_depth = 4;
  int max_depth = 24;
  PressureOptions pressure;
};

/// Bracket [lo, hi] with hi - lo <= tol such that the certified bounds prove
/// P > 0 below lo and P < 0 above hi. Throws PreconditionError("NotContractive")
/// and InconclusiveBracket.
AffinityDimension affinity_dimension(const AffineIFS& ifs, SubshiftKind kind, double tol,
                                     const AffinityOptions& options = {});

// ---------------------------------------------------------------------------

struct PressureGap {
  enum class Status { CertifiedGap, Inconclusive };
  Status status = Status::Inconclusive;
  double lower_full = 0.0;  ///< certified lower bound for P(A, s)
  double upper_inv = 0.0;   ///< upper bound for P(I^N, A, s)
  int depth = 0;
  PressureEstimate full;
  PressureEstimate invertible;
};

struct GapOptions {
  int max_depth = 14;
  PressureOptions pressure;
};

/// Tries depths 2, 4, ... up to max_depth. Throws
/// PreconditionError("MissingRankOne" / "MissingInvertible" / "DomainError").
PressureGap pressure_gap(const AffineIFS& ifs, double s, const GapOptions& options = {});

// ---------------------------------------------------------------------------

enum class MeasureProvenance { GibbsPhi, Bernoulli, Uniform, Custom };
std::string_view to_string(MeasureProvenance p);

/// Probability vector over the words of one level.
struct CylinderMeasure {
  SubshiftKind kind = SubshiftKind::Full;
  int depth = 0;
  std::vector<Word> words;
  std::vector<double> weights;
  MeasureProvenance provenance = MeasureProvenance::Custom;
  double parameter = 0.0;  ///< s for GibbsPhi

  /// Uniform weights on the level set of `kind`.
  static CylinderMeasure uniform(const AffineIFS& ifs, SubshiftKind kind, int n);
  /// Product weights p_{w_1} ... p_{w_n} on the full shift (p sums to 1).
  static CylinderMeasure bernoulli(const AffineIFS& ifs, const std::vector<double>& p, int n);
  /// Validates non-negativity, equal word lengths and unit mass (1e-12).
  static CylinderMeasure custom(SubshiftKind kind, std::vector<Word> words, std::vector<double> weights);
};

/// Weights proportional to phi^s(A_w) over Sigma_n (||A_w||^s for s <= 1).
/// Throws PreconditionError("EmptySigma").
CylinderMeasure gibbs_weights(const AffineIFS& ifs, double s, int n,
                              std::uint64_t node_budget = default_node_budget());

struct QuasiMultiplicativity {
  /// Extremes of phi^s(A_ij) / (phi^s(A_i) phi^s(A_j)) over Sigma_n words
  /// split at n/2.
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

QuasiMultiplicativity quasi_multiplicativity(const AffineIFS& ifs, double s, int n,
                                             std::uint64_t node_budget = default_node_budget());

struct MeasureDiagnostics {
  double entropy_rate = 0.0;  ///< h_n
  double energy_rate = 0.0;   ///< Lambda_n, may be -infinity
  /// (1/n) log of the level-n sum of phi^s over the measure's word space.
  double level_pressure = 0.0;
  bool jensen_holds = false;
};

/// Throws PreconditionError("DepthMismatch") when the measure's words are not
/// words of its level.
MeasureDiagnostics measure_diagnostics(const AffineIFS& ifs, const CylinderMeasure& mu, double s,
                                       std::uint64_t node_budget = default_node_budget());

}  // namespace affthermo
