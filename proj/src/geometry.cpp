#include "affthermo/geometry.hpp"

#include "affthermo/classify.hpp"
#include "affthermo/errors.hpp"
#include "affthermo/format.hpp"
#include "affthermo/pressure.hpp"
#include "affthermo/symbolic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace affthermo {

std::string_view to_string(SourceSet s) {
  switch (s) {
    case SourceSet::X:
      return "X";
    case SourceSet::Xprime:
      return "Xprime";
    case SourceSet::XdoublePrime:
      return "XdoublePrime";
    case SourceSet::Condensation:
      return "Condensation";
    case SourceSet::Reconstructed:
      return "Reconstructed";
    case SourceSet::Projection:
      return "Projection";
    case SourceSet::Sample:
      break;
  }
  return "Sample";
}

std::optional<SourceSet> parse_source_set(std::string_view text) {
  for (auto s : {SourceSet::X, SourceSet::Xprime, SourceSet::XdoublePrime, SourceSet::Condensation,
                 SourceSet::Reconstructed, SourceSet::Projection, SourceSet::Sample}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

namespace {

constexpr int kMaxTreeDepth = 256;

SourceSet source_for(SubshiftKind kind) {
  switch (kind) {
    case SubshiftKind::Full:
      return SourceSet::Xprime;
    case SubshiftKind::Sigma:
      return SourceSet::XdoublePrime;
    case SubshiftKind::Invertible:
      break;
  }
  return SourceSet::X;
}

struct CoverWalk {
  const AffineIFS& ifs;
  SubshiftKind kind;
  double leaf_norm;  ///< stop once ||A_w|| <= leaf_norm
  const std::vector<Letter>& alphabet;
  const SigmaLiveness* liveness;
  NodeCounter& counter;
  std::vector<Vec2>& out;

  void expand(const Mat2& product, Vec2 offset, double norm, int depth) {
    for (Letter l : alphabet) {
      counter.tick();
      const AffineMap& map = ifs.map(l);
      const Vec2 child_offset = product * map.translation + offset;
      bool zero = ifs.letter_rank(l) == 0;
      Mat2 child = product * map.linear;
      double child_norm = 0.0;
      if (!zero) {
        child_norm = op_norm(child);
        zero = child_norm <= ifs.rank_tolerance() * norm * ifs.letter_norm(l);
      }
      if (zero) {
        // f_w collapses the ball to the single point v_w.
        if (kind == SubshiftKind::Full) out.push_back(child_offset);
        continue;
      }
      if (child_norm <= leaf_norm || depth + 1 >= kMaxTreeDepth) {
        if (kind != SubshiftKind::Sigma || liveness->extends_after(l)) out.push_back(child_offset);
        continue;
      }
      expand(child, child_offset, child_norm, depth + 1);
    }
  }
};

std::int64_t cell_of(double x, double h) { return static_cast<std::int64_t>(std::floor(x / h)); }

std::uint64_t pack(std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(ix) << 32) ^ (static_cast<std::uint64_t>(iy) & 0xffffffffULL);
}

class GridIndex {
 public:
  GridIndex(const std::vector<Vec2>& points, double cell) : points_(points), cell_(cell) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[pack(cell_of(points[i].x, cell), cell_of(points[i].y, cell))].push_back(i);
    }
  }

  double nearest_distance(Vec2 p) const {
    const auto cx = cell_of(p.x, cell_);
    const auto cy = cell_of(p.y, cell_);
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t r = 0; r <= 64; ++r) {
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        for (std::int64_t dy = -r; dy <= r; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
          const auto it = cells_.find(pack(cx + dx, cy + dy));
          if (it == cells_.end()) continue;
          for (std::size_t i : it->second) best = std::min(best, (points_[i] - p).norm());
        }
      }
      if (best <= static_cast<double>(r) * cell_) return best;
    }
    for (const auto& q : points_) best = std::min(best, (q - p).norm());
    return best;
  }

 private:
  const std::vector<Vec2>& points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

double directed_hausdorff(const std::vector<Vec2>& from, const GridIndex& to) {
  double worst = 0.0;
  for (const auto& p : from) worst = std::max(worst, to.nearest_distance(p));
  return worst;
}

/// Incremental thinning: one point per cell.
class ThinnedSet {
 public:
  explicit ThinnedSet(double cell) : cell_(cell) {}
  void insert(Vec2 p) {
    if (seen_.insert(pack(cell_of(p.x, cell_), cell_of(p.y, cell_))).second) points_.push_back(p);
  }
  std::vector<Vec2> take() { return std::move(points_); }
  std::size_t size() const { return points_.size(); }

 private:
  double cell_;
  std::unordered_set<std::uint64_t> seen_;
  std::vector<Vec2> points_;
};

}  // namespace

PointCloud attractor_cloud(const AffineIFS& ifs, SubshiftKind kind, double eps, std::uint64_t node_budget) {
  if (!(eps > 0.0)) throw PreconditionError("geometry", "DomainError", "resolution eps must be positive");
  if (!ifs.is_contractive()) {
    throw PreconditionError("geometry", "NotContractive",
                            "attractor generation needs max ||A_i|| < 1, got " + format_number(ifs.max_norm()));
  }
  const double radius = ifs.ball_radius();
  PointCloud cloud;
  cloud.resolution = eps;
  cloud.source = source_for(kind);

  std::optional<SigmaLiveness> liveness;
  if (kind == SubshiftKind::Sigma) liveness.emplace(ifs);
  const auto alphabet = alphabet_for(ifs, kind);
  const bool nonempty = kind == SubshiftKind::Sigma ? liveness->extends(Word{}) : !alphabet.empty();
  if (!nonempty) return cloud;
  if (2.0 * radius <= eps) {
    cloud.points.push_back({0.0, 0.0});
    return cloud;
  }
  const double leaf_norm = radius > 0.0 ? eps / (2.0 * radius) : std::numeric_limits<double>::infinity();

  NodeCounter counter(node_budget, "geometry");
  std::vector<std::vector<Vec2>> shards(alphabet.size());
  run_sharded(alphabet.size(), [&](std::size_t r) {
    CoverWalk full{ifs, kind, leaf_norm, alphabet, liveness ? &*liveness : nullptr, counter, shards[r]};
    // Expand the single root, then hand its subtree to the full alphabet.
    const Letter l = alphabet[r];
    const AffineMap& map = ifs.map(l);
    counter.tick();
    if (ifs.letter_rank(l) == 0) {
      if (kind == SubshiftKind::Full) shards[r].push_back(map.translation);
      return;
    }
    const double norm = ifs.letter_norm(l);
    if (norm <= leaf_norm) {
      if (kind != SubshiftKind::Sigma || liveness->extends_after(l)) shards[r].push_back(map.translation);
      return;
    }
    full.expand(map.linear, map.translation, norm, 1);
  });
  for (auto& s : shards) cloud.points.insert(cloud.points.end(), s.begin(), s.end());
  std::sort(cloud.points.begin(), cloud.points.end(),
            [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  cloud.points.erase(std::unique(cloud.points.begin(), cloud.points.end()), cloud.points.end());
  return cloud;
}

Vec2 canonical_point(const AffineIFS& ifs, const Word& word) {
  Mat2 product = Mat2::identity();
  Vec2 offset{0.0, 0.0};
  for (Letter l : word.letters()) {
    offset = product * ifs.map(l).translation + offset;
    product = product * ifs.matrix(l);
  }
  return offset;
}

double canonical_point_error(const AffineIFS& ifs, const Word& word) {
  return op_norm(word_product(ifs, word)) * ifs.ball_radius();
}

std::vector<Vec2> thin_points(const std::vector<Vec2>& points, double cell) {
  ThinnedSet set(cell);
  for (const auto& p : points) set.insert(p);
  return set.take();
}

double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) {
    throw PreconditionError("geometry", "EmptyCloud", "Hausdorff distance needs two non-empty clouds");
  }
  double lo_x = a.front().x, hi_x = lo_x, lo_y = a.front().y, hi_y = lo_y;
  for (const auto* cloud : {&a, &b}) {
    for (const auto& p : *cloud) {
      lo_x = std::min(lo_x, p.x);
      hi_x = std::max(hi_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_y = std::max(hi_y, p.y);
    }
  }
  const double extent = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double n = static_cast<double>(std::max(a.size(), b.size()));
  const double cell = extent / std::max(1.0, std::sqrt(n));
  const GridIndex index_a(a, cell);
  const GridIndex index_b(b, cell);
  return std::max(directed_hausdorff(a, index_b), directed_hausdorff(b, index_a));
}

CondensationDecomposition condensation_decomposition(const AffineIFS& ifs, double eps,
                                                     std::uint64_t node_budget) {
  const auto invertible = ifs.invertible_letters();
  if (invertible.empty() || invertible.size() == ifs.size()) {
    throw PreconditionError("geometry", "NotNonInvertible",
                            "the decomposition needs both invertible and singular letters");
  }
  if (!(eps > 0.0)) throw PreconditionError("geometry", "DomainError", "resolution eps must be positive");
  CondensationDecomposition d;
  d.direct = attractor_cloud(ifs, SubshiftKind::Full, eps, node_budget);
  d.x = attractor_cloud(ifs, SubshiftKind::Invertible, 0.5 * eps, node_budget);
  const PointCloud fine = attractor_cloud(ifs, SubshiftKind::Full, 0.5 * eps, node_budget);

  // Thinning moves a point by at most cell * sqrt(2) = eps / 4.
  const double cell = eps / (4.0 * std::numbers::sqrt2);
  ThinnedSet condensation(cell);
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    if (ifs.letter_rank(i) == 2) continue;
    for (const auto& p : fine.points) condensation.insert(ifs.map(i)(p));
  }
  d.condensation.points = condensation.take();
  d.condensation.resolution = eps;
  d.condensation.source = SourceSet::Condensation;

  ThinnedSet rebuilt(cell);
  for (const auto& p : d.x.points) rebuilt.insert(p);
  const double radius = ifs.ball_radius();
  const double leaf_norm = radius > 0.0 ? eps / (8.0 * radius) : std::numeric_limits<double>::infinity();
  NodeCounter counter(node_budget, "geometry");
  // Depth-first over invertible words, the empty word included.
  struct Frame {
    Mat2 product;
    Vec2 offset;
  };
  std::vector<Frame> stack{{Mat2::identity(), {0.0, 0.0}}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    counter.tick();
    for (const auto& c : d.condensation.points) rebuilt.insert(f.product * c + f.offset);
    if (op_norm(f.product) <= leaf_norm) continue;
    for (auto it = invertible.rbegin(); it != invertible.rend(); ++it) {
      const AffineMap& map = ifs.map(*it);
      stack.push_back({f.product * map.linear, f.product * map.translation + f.offset});
    }
  }
  d.reconstructed.points = rebuilt.take();
  d.reconstructed.resolution = eps;
  d.reconstructed.source = SourceSet::Reconstructed;
  return d;
}

ProjectedSet project_cloud(const PointCloud& cloud, Direction direction) {
  ProjectedSet set;
  set.angle = direction.angle();
  set.resolution = cloud.resolution;
  const Vec2 u = direction.unit();
  set.values.reserve(cloud.points.size());
  for (const auto& p : cloud.points) set.values.push_back(p.dot(u));
  std::sort(set.values.begin(), set.values.end());
  set.values.erase(std::unique(set.values.begin(), set.values.end(),
                               [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
                   set.values.end());
  return set;
}

std::vector<double> dyadic_scales(int from_exponent, int to_exponent) {
  std::vector<double> scales;
  const int step = from_exponent <= to_exponent ? 1 : -1;
  for (int e = from_exponent;; e += step) {
    scales.push_back(std::ldexp(1.0, -e));
    if (e == to_exponent) break;
  }
  return scales;
}

namespace {

void check_scales(const std::vector<double>& scales, double resolution) {
  if (scales.size() < 2) {
    throw PreconditionError("geometry", "DomainError", "box counting needs at least two scales");
  }
  for (double h : scales) {
    if (!(h > 0.0)) throw PreconditionError("geometry", "DomainError", "box sizes must be positive");
  }
  const double smallest = *std::min_element(scales.begin(), scales.end());
  if (resolution > smallest / 4.0) {
    throw PreconditionError("geometry", "ScaleBelowResolution",
                            "cloud resolution " + format_number(resolution) +
                                " exceeds a quarter of the smallest box size " + format_number(smallest));
  }
}

/// Anchored grid first, then 4 offsets drawn uniformly from [0, largest)^dim.
std::vector<std::array<double, 2>> grid_offsets(double largest, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::array<double, 2>> offsets{{0.0, 0.0}};
  for (int i = 0; i < 4; ++i) {
    const double ox = unit(rng) * largest;
    const double oy = unit(rng) * largest;
    offsets.push_back({ox, oy});
  }
  return offsets;
}

template <class KeyOf>
BoxDimEstimate count_boxes(std::size_t n_points, const std::vector<double>& scales, std::uint64_t seed,
                           KeyOf key_of) {
  BoxDimEstimate est;
  est.scales = scales;
  const double largest = *std::max_element(scales.begin(), scales.end());
  const auto offsets = grid_offsets(largest, seed);
  std::vector<std::uint64_t> keys(n_points);
  for (double h : scales) {
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (std::size_t g = 0; g < offsets.size(); ++g) {
      for (std::size_t i = 0; i < n_points; ++i) keys[i] = key_of(i, h, offsets[g]);
      std::sort(keys.begin(), keys.end());
      const auto count = static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
      est.table.push_back({h, count, static_cast<int>(g)});
      fewest = std::min(fewest, count);
    }
    // The best aligned grid is the closest to a minimal cover.
    est.counts.push_back(static_cast<double>(fewest));
  }
  // Least squares of log count against log(1/h).
  const std::size_t k = scales.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += -std::log(scales[i]);
    my += std::log(std::max(est.counts[i], 1.0));
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = -std::log(scales[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(std::max(est.counts[i], 1.0)) - my);
  }
  est.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  if (k > 2 && sxx > 0.0) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double fit = my + est.slope * (-std::log(scales[i]) - mx);
      const double r = std::log(std::max(est.counts[i], 1.0)) - fit;
      ssr += r * r;
    }
    est.stderr_ = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
  }
  return est;
}

}  // namespace

BoxDimEstimate box_dimension(const PointCloud& cloud, const std::vector<double>& scales, std::uint64_t seed) {
  check_scales(scales, cloud.resolution);
  if (cloud.points.empty()) throw PreconditionError("geometry", "EmptyCloud", "box counting needs points");
  return count_boxes(cloud.points.size(), scales, seed,
                     [&](std::size_t i, double h, const std::array<double, 2>& o) {
                       const Vec2& p = cloud.points[i];
                       return pack(cell_of(p.x - o[0], h), cell_of(p.y - o[1], h));
                     });
}

BoxDimEstimate box_dimension(const ProjectedSet& set, const std::vector<double>& scales, std::uint64_t seed) {
  check_scales(scales, set.resolution);
  if (set.values.empty()) throw PreconditionError("geometry", "EmptyCloud", "box counting needs points");
  return count_boxes(set.values.size(), scales, seed,
                     [&](std::size_t i, double h, const std::array<double, 2>& o) {
                       return static_cast<std::uint64_t>(cell_of(set.values[i] - o[0], h));
                     });
}

// ---------------------------------------------------------------------------

std::optional<Scenario> parse_scenario(std::string_view text) {
  if (text == "1" || text == "one" || text == "PartOne") return Scenario::PartOne;
  if (text == "2" || text == "two" || text == "PartTwo") return Scenario::PartTwo;
  if (text == "3" || text == "three" || text == "PartThree") return Scenario::PartThree;
  return std::nullopt;
}

double ExperimentReport::value(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw PreconditionError("geometry", "UnknownKey", "experiment report has no value '" + key + "'");
}

std::string ExperimentReport::to_text() const {
  std::ostringstream out;
  const char* names[] = {"part-one", "part-two", "part-three"};
  out << "scenario: " << names[static_cast<int>(scenario)] << '\n';
  out << "seed: " << seed << '\n';
  for (std::size_t i = 0; i < translations.size(); ++i) {
    out << "translation" << i << ": " << format_number(translations[i].x) << ' '
        << format_number(translations[i].y) << '\n';
  }
  for (const auto& [k, v] : values) out << k << ": " << format_number(v) << '\n';
  for (const auto& [k, v] : hypotheses) out << "hypothesis." << k << ": " << v << '\n';
  return out.str();
}

namespace {

void add_affdim(ExperimentReport& report, const AffineIFS& ifs, SubshiftKind kind, const std::string& prefix,
                double tol) {
  AffinityDimension dim;
  try {
    dim = affinity_dimension(ifs, kind, tol);
  } catch (const InconclusiveBracket& e) {
    dim = e.best();
    report.values.emplace_back(prefix + "_inconclusive", 1.0);
  }
  report.values.emplace_back(prefix + "_lo", dim.lo);
  report.values.emplace_back(prefix + "_hi", dim.hi);
  report.values.emplace_back(prefix + "_mid", 0.5 * (dim.lo + dim.hi));
}

std::string status(bool certified) { return certified ? "certified" : "unknown"; }

}  // namespace

ExperimentReport theorem_experiment(const AffineIFS& input, Scenario scenario, std::uint64_t seed,
                                    const ExperimentConfig& config) {
  ExperimentReport report;
  report.scenario = scenario;
  report.seed = seed;

  AffineIFS ifs = input;
  if (scenario != Scenario::PartOne && config.random_translations) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<Vec2> translations;
    for (std::size_t i = 0; i < ifs.size(); ++i) {
      const double x = coord(rng);
      const double y = coord(rng);
      translations.push_back({x, y});
    }
    ifs = ifs.with_translations(translations);
  }
  for (const auto& m : ifs.maps()) report.translations.push_back(m.translation);

  const auto scales = dyadic_scales(config.scale_from, config.scale_to);
  const PointCloud full = attractor_cloud(ifs, SubshiftKind::Full, config.epsilon, config.node_budget);
  const auto dim_full = box_dimension(full, scales, seed);
  report.values.emplace_back("boxdim_Xprime", dim_full.slope);
  report.values.emplace_back("boxdim_Xprime_stderr", dim_full.stderr_);

  report.hypotheses.emplace_back("contractive", ifs.is_contractive() ? "certified" : "violated");
  report.hypotheses.emplace_back("no_common_fixed_point", ifs.has_common_fixed_point() ? "violated" : "certified");
  report.hypotheses.emplace_back("strong_open_set_condition", "unknown");

  const auto invertible = ifs.invertible_letters();
  std::optional<AffineIFS> inv_tuple;
  if (!invertible.empty()) inv_tuple = ifs.restricted_to(invertible);
  bool inv_dominated = false;
  bool inv_irreducible = false;
  if (inv_tuple) {
    inv_dominated = find_domination_certificate(*inv_tuple).has_value();
    inv_irreducible = is_irreducible(*inv_tuple).irreducible;
  }
  report.hypotheses.emplace_back("invertible_part_dominated", status(inv_dominated));
  report.hypotheses.emplace_back("invertible_part_strongly_irreducible",
                                 status(inv_dominated && inv_irreducible));

  switch (scenario) {
    case Scenario::PartOne: {
      if (inv_tuple) {
        const PointCloud x = attractor_cloud(ifs, SubshiftKind::Invertible, config.epsilon, config.node_budget);
        report.values.emplace_back("boxdim_X", box_dimension(x, scales, seed).slope);
        add_affdim(report, *inv_tuple, SubshiftKind::Full, "affdim_invertible", config.affdim_tol);
      }
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      double sum = 0.0;
      for (int k = 0; k < config.angle_sweep; ++k) {
        const Direction dir(std::numbers::pi * k / config.angle_sweep);
        const double d = box_dimension(project_cloud(full, dir), scales, seed).slope;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        sum += d;
      }
      report.values.emplace_back("projection_boxdim_min", lo);
      report.values.emplace_back("projection_boxdim_max", hi);
      report.values.emplace_back("projection_boxdim_mean", sum / config.angle_sweep);
      break;
    }
    case Scenario::PartTwo: {
      report.hypotheses.emplace_back("max_norm_below_half", ifs.max_norm() < 0.5 ? "certified" : "violated");
      report.hypotheses.emplace_back("translations", config.random_translations ? "random (almost-all sampled)"
                                                                                : "given");
      if (inv_tuple) {
        const PointCloud x = attractor_cloud(ifs, SubshiftKind::Invertible, config.epsilon, config.node_budget);
        const double dx = box_dimension(x, scales, seed).slope;
        report.values.emplace_back("boxdim_X", dx);
        report.values.emplace_back("boxdim_difference", dim_full.slope - dx);
      }
      add_affdim(report, ifs, SubshiftKind::Full, "affdim_full", config.affdim_tol);
      add_affdim(report, ifs, SubshiftKind::Invertible, "affdim_invertible", config.affdim_tol);
      if (ifs.contains_rank_one() && ifs.contains_invertible()) {
        const auto gap = pressure_gap(ifs, 1.0);
        report.values.emplace_back("gap_certified", gap.status == PressureGap::Status::CertifiedGap ? 1.0 : 0.0);
        report.values.emplace_back("gap_lower_full", gap.lower_full);
        report.values.emplace_back("gap_upper_invertible", gap.upper_inv);
      }
      break;
    }
    case Scenario::PartThree: {
      double worst = 0.0;
      for (Letter l : ifs.rank_one_letters()) {
        const auto form = rank_one_factor(ifs.matrix(l), ifs.rank_tolerance());
        const Direction dir = form.kernel_line.perpendicular();
        const double d = box_dimension(project_cloud(full, dir), scales, seed).slope;
        const std::string tag = std::to_string(static_cast<int>(l));
        report.values.emplace_back("boxdim_projection_" + tag, d);
        report.values.emplace_back("kernel_perp_angle_" + tag, dir.angle());
        worst = std::max(worst, std::abs(dim_full.slope - d));
      }
      report.values.emplace_back("max_abs_difference", worst);
      break;
    }
  }
  return report;
}

}  // namespace affthermo
