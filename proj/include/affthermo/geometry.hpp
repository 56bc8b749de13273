#pragma once

// Attractors of planar affine IFSs as finite point clouds with a guaranteed
// resolution, the condensation decomposition of the non-invertible
// attractor, projections, box counting and the desk-scale dimension
// experiments.

#include "affthermo/ifs.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affthermo {

enum class SourceSet { X, Xprime, XdoublePrime, Condensation, Reconstructed, Projection, Sample };
std::string_view to_string(SourceSet s);
std::optional<SourceSet> parse_source_set(std::string_view text);

/// Finite point set; every point of the target set is within `resolution`
/// of the cloud and vice versa.
struct PointCloud {
  std::vector<Vec2> points;
  double resolution = 0.0;
  SourceSet source = SourceSet::Sample;

  std::size_t size() const { return points.size(); }
};

/// Covering generation: expands the word tree of `kind` until
/// 2 R ||A_w|| <= eps, where R = ball_radius(), and emits f_w(0) per leaf.
/// Sigma leaves that cannot be extended to an infinite word are dropped.
/// Throws PreconditionError("NotContractive"/"DomainError") and BudgetExceeded.
PointCloud attractor_cloud(const AffineIFS& ifs, SubshiftKind kind, double eps,
                           std::uint64_t node_budget = default_node_budget());

/// f_w(0) for a finite word; the origin for the empty word.
Vec2 canonical_point(const AffineIFS& ifs, const Word& word);

/// ||A_w|| R: distance bound between f_w(0) and the projection of any
/// infinite extension of w. Throws PreconditionError("NotContractive").
double canonical_point_error(const AffineIFS& ifs, const Word& word);

struct CondensationDecomposition {
  PointCloud x;              ///< the invertible attractor X
  PointCloud condensation;   ///< C = union over non-invertible i of f_i(X')
  PointCloud reconstructed;  ///< X together with f_w(C) over invertible words w
  PointCloud direct;         ///< X' generated directly at resolution eps
};

/// Throws PreconditionError("NotNonInvertible") unless the tuple has both
/// invertible and singular letters.
CondensationDecomposition condensation_decomposition(const AffineIFS& ifs, double eps,
                                                     std::uint64_t node_budget = default_node_budget());

/// Symmetric Hausdorff distance between two non-empty clouds.
double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

/// Keeps one point per grid cell of side `cell`.
std::vector<Vec2> thin_points(const std::vector<Vec2>& points, double cell);

/// Scalars along a line through the origin.
struct ProjectedSet {
  std::vector<double> values;  ///< sorted, duplicates collapsed
  double angle = 0.0;
  double resolution = 0.0;
};

/// Orthogonal projection onto the line at `direction`.
ProjectedSet project_cloud(const PointCloud& cloud, Direction direction);

struct BoxCountRow {
  double scale = 0.0;
  std::size_t count = 0;
  int offset_id = 0;  ///< 0 is the anchored grid
};

struct BoxDimEstimate {
  std::vector<double> scales;
  std::vector<double> counts;  ///< fewest boxes over the grids, per scale
  double slope = 0.0;
  double stderr_ = 0.0;
  std::vector<BoxCountRow> table;
};

/// Box sizes 2^-from, ..., 2^-to.
std::vector<double> dyadic_scales(int from_exponent, int to_exponent);

/// Box counting with an anchored grid plus 4 seeded random offsets, keeping
/// the smallest count per scale; slope of log count against log(1/scale) by
/// least squares. Throws
/// PreconditionError("ScaleBelowResolution") if the cloud resolution exceeds
/// a quarter of the smallest scale, and "DomainError" for fewer than two
/// scales.
BoxDimEstimate box_dimension(const PointCloud& cloud, const std::vector<double>& scales,
                             std::uint64_t seed = 0);
BoxDimEstimate box_dimension(const ProjectedSet& set, const std::vector<double>& scales,
                             std::uint64_t seed = 0);

// ---------------------------------------------------------------------------

enum class Scenario { PartOne, PartTwo, PartThree };
std::optional<Scenario> parse_scenario(std::string_view text);

struct ExperimentConfig {
  double epsilon = std::ldexp(1.0, -11);
  int scale_from = 3;
  int scale_to = 8;
  int angle_sweep = 32;
  double affdim_tol = 1e-3;
  /// Parts two and three draw translations uniformly from [-1, 1]^2.
  bool random_translations = true;
  std::uint64_t node_budget = default_node_budget();
};

struct ExperimentReport {
  Scenario scenario = Scenario::PartOne;
  std::uint64_t seed = 0;
  std::vector<Vec2> translations;
  /// Named results in insertion order.
  std::vector<std::pair<std::string, double>> values;
  /// Hypothesis name -> "certified" / "assumed" / "unknown" / "violated".
  std::vector<std::pair<std::string, std::string>> hypotheses;

  double value(const std::string& key) const;
  std::string to_text() const;
};

ExperimentReport theorem_experiment(const AffineIFS& ifs, Scenario scenario, std::uint64_t seed,
                                    const ExperimentConfig& config = {});

}  // namespace affthermo
