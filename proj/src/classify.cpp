#include "affthermo/classify.hpp"

#include "affthermo/errors.hpp"
#include "affthermo/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace affthermo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_nonzero_letters(const AffineIFS& ifs) {
  if (const auto zeros = ifs.zero_letters(); !zeros.empty()) {
    throw PreconditionError("classify", "RankZeroLetter",
                            "letter " + std::to_string(zeros.front()) +
                                " is the zero matrix; domination needs non-zero letters");
  }
}

/// Image of an interval under one letter. Width 0 for rank-one letters.
struct IntervalImage {
  bool ok = false;
  ProjectiveInterval image;
};

IntervalImage push_interval(const AffineIFS& ifs, Letter letter, const ProjectiveInterval& in,
                            double slack) {
  const Mat2& m = ifs.matrix(letter);
  if (ifs.letter_rank(letter) == 1) {
    const auto form = rank_one_factor(m, ifs.rank_tolerance());
    if (in.contains(form.kernel_line.angle(), -slack)) return {};
    return {true, {form.image_line.angle(), 0.0}};
  }
  const double a = Direction::of(m * Direction(in.start).unit()).angle();
  const double b = Direction::of(m * Direction(in.start + in.width).unit()).angle();
  if (m.det() > 0) return {true, {a, wrap_pi(b - a)}};
  return {true, {b, wrap_pi(a - b)}};
}

/// Sorts by start and checks that the intervals are proper and disjoint.
bool normalize(Multicone& cone) {
  if (cone.empty()) return false;
  double total = 0.0;
  for (auto& iv : cone) {
    iv.start = wrap_pi(iv.start);
    if (!(iv.width > 0.0) || iv.width >= kPi) return false;
    total += iv.width;
  }
  if (total >= kPi) return false;
  std::sort(cone.begin(), cone.end(),
            [](const ProjectiveInterval& x, const ProjectiveInterval& y) { return x.start < y.start; });
  for (std::size_t i = 0; i < cone.size(); ++i) {
    const auto& cur = cone[i];
    const auto& next = cone[(i + 1) % cone.size()];
    if (cone.size() == 1) break;
    if (wrap_pi(next.start - cur.start) <= cur.width) return false;
  }
  return true;
}

std::vector<double> grid_of(const Multicone& cone, int points) {
  std::vector<double> angles;
  double total = 0.0;
  for (const auto& iv : cone) total += iv.width;
  for (const auto& iv : cone) {
    if (iv.width == 0.0 || total == 0.0) {
      angles.push_back(iv.start);
      continue;
    }
    const int k = std::max(2, static_cast<int>(std::lround(points * iv.width / total)));
    for (int j = 0; j < k; ++j) angles.push_back(iv.start + iv.width * j / (k - 1));
  }
  return angles;
}

Multicone candidate_quadrant(double start) { return {{start, kPi / 2}}; }

std::vector<double> projective_orbit(const AffineIFS& ifs, const DominationSearchConfig& config) {
  std::vector<double> points;
  for (int k = 0; k < 16; ++k) points.push_back(k * kPi / 16);
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    for (auto d : eigen_directions(ifs.matrix(i), ifs.rank_tolerance())) points.push_back(d.angle());
  }
  for (int iter = 0; iter < config.orbit_depth; ++iter) {
    std::vector<double> next;
    next.reserve(points.size() * ifs.size());
    for (double p : points) {
      const Vec2 u = Direction(p).unit();
      for (std::size_t i = 0; i < ifs.size(); ++i) {
        const Vec2 y = ifs.matrix(i) * u;
        if (y.norm() <= ifs.rank_tolerance() * ifs.letter_norm(i)) continue;
        next.push_back(Direction::of(y).angle());
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end(), [](double x, double y) { return y - x <= 1e-9; }),
               next.end());
    if (next.size() > config.max_orbit_points) {
      std::vector<double> thinned;
      const double step = static_cast<double>(next.size()) / config.max_orbit_points;
      for (std::size_t j = 0; j < config.max_orbit_points; ++j) {
        thinned.push_back(next[static_cast<std::size_t>(j * step)]);
      }
      next = std::move(thinned);
    }
    if (next.empty()) break;
    points = std::move(next);
  }
  return points;
}

/// Splits the sorted orbit at its `k` largest circular gaps and inflates
/// each cluster by `fraction` of the smallest gap used.
Multicone cluster_cone(const std::vector<double>& sorted, std::size_t k, double fraction) {
  const std::size_t m = sorted.size();
  std::vector<std::pair<double, std::size_t>> gaps;  // gap after point j
  for (std::size_t j = 0; j < m; ++j) {
    const double g = j + 1 < m ? sorted[j + 1] - sorted[j] : sorted[0] + kPi - sorted[j];
    gaps.emplace_back(g, j);
  }
  std::stable_sort(gaps.begin(), gaps.end(), [](auto& x, auto& y) { return x.first > y.first; });
  if (k > m) return {};
  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i < k; ++i) cuts.push_back(gaps[i].second);
  const double eta = fraction * gaps[k - 1].first;
  if (!(eta > 0.0)) return {};
  std::sort(cuts.begin(), cuts.end());
  Multicone cone;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t first = (cuts[i] + 1) % m;
    const std::size_t last = cuts[(i + 1) % k];
    const double span = wrap_pi(sorted[last] - sorted[first]);
    cone.push_back({sorted[first] - eta, span + 2 * eta});
  }
  return cone;
}

int feasible_verify_depth(std::size_t letters, int depth, int grid_points, std::uint64_t budget) {
  const auto per_node = static_cast<std::uint64_t>(std::max(1, grid_points / 64));
  while (depth > 1 && full_tree_nodes(letters, depth) * per_node > budget) --depth;
  return depth;
}

}  // namespace

bool ProjectiveInterval::contains(double angle, double margin) const {
  const double offset = wrap_pi(angle - (start + margin));
  const double span = width - 2 * margin;
  if (span < 0) return false;
  if (span >= kPi) return true;
  return offset <= span;
}

Multicone image_cone(const AffineIFS& ifs, const Multicone& multicone) {
  Multicone out;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    for (const auto& iv : multicone) {
      const auto img = push_interval(ifs, static_cast<Letter>(i), iv, 0.0);
      if (img.ok) out.push_back(img.image);
    }
  }
  return out;
}

std::optional<DominationCertificate> certify_multicone(const AffineIFS& ifs, Multicone multicone,
                                                       const DominationSearchConfig& config) {
  require_nonzero_letters(ifs);
  if (!normalize(multicone)) return std::nullopt;
  const double slack = config.rounding_slack;
  double max_width = 0.0;
  double min_margin = kPi;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    for (const auto& iv : multicone) {
      const auto img = push_interval(ifs, static_cast<Letter>(i), iv, slack);
      if (!img.ok) return std::nullopt;
      bool inside = false;
      for (const auto& target : multicone) {
        const double offset = wrap_pi(img.image.start - target.start);
        const double right = target.width - offset - img.image.width;
        if (offset > slack && right > slack) {
          inside = true;
          min_margin = std::min(min_margin, std::min(offset, right) - slack);
          break;
        }
      }
      if (!inside) return std::nullopt;
      max_width = std::max(max_width, img.image.width + 2 * slack);
    }
  }
  DominationCertificate cert;
  cert.multicone = std::move(multicone);
  cert.kappa = std::min(1.0, std::cos(0.5 * max_width) * std::sin(min_margin));
  if (!(cert.kappa > 0.0)) return std::nullopt;
  return cert;
}

double observed_cone_ratio(const AffineIFS& ifs, const DominationCertificate& cert, int depth,
                           int grid_points, std::uint64_t node_budget) {
  const auto angles = grid_of(image_cone(ifs, cert.multicone), grid_points);
  std::vector<Vec2> units;
  units.reserve(angles.size());
  for (double a : angles) units.push_back(Direction(a).unit());
  double worst = std::numeric_limits<double>::infinity();
  NodeCounter counter(node_budget, "classify");
  WalkOptions options{SubshiftKind::Full, depth, false};
  walk_tree(ifs, options, counter, [&](const TreeNode& node) {
    if (node.zero) {
      worst = 0.0;
      return false;
    }
    for (const Vec2& u : units) worst = std::min(worst, (node.product * u).norm() / node.norm);
    return true;
  });
  return worst;
}

std::optional<DominationCertificate> find_domination_certificate(const AffineIFS& ifs,
                                                                 const DominationSearchConfig& config) {
  require_nonzero_letters(ifs);

  auto finish = [&](DominationCertificate cert) -> std::optional<DominationCertificate> {
    const int depth =
        feasible_verify_depth(ifs.size(), config.verify_depth, config.grid_points, config.verify_node_budget);
    cert.verified_depth = depth;
    cert.observed_ratio = observed_cone_ratio(ifs, cert, depth, config.grid_points,
                                              std::numeric_limits<std::uint64_t>::max());
    if (cert.observed_ratio < cert.kappa) return std::nullopt;
    return cert;
  };

  for (double start : {0.0, kPi / 2}) {
    if (auto cert = certify_multicone(ifs, candidate_quadrant(start), config)) return finish(*cert);
  }

  const auto orbit = projective_orbit(ifs, config);
  std::optional<DominationCertificate> best;
  const std::size_t max_k = std::min(config.max_intervals, orbit.size());
  for (std::size_t k = 1; k <= max_k; ++k) {
    for (double fraction : {0.45, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005}) {
      Multicone cone = cluster_cone(orbit, k, fraction);
      if (cone.empty()) continue;
      if (auto cert = certify_multicone(ifs, std::move(cone), config)) {
        if (!best || cert->kappa > best->kappa) best = std::move(cert);
      }
    }
  }
  if (!best) return std::nullopt;
  return finish(std::move(*best));
}

// ---------------------------------------------------------------------------

namespace {

bool is_perfect_square(const boost::multiprecision::cpp_int& n, boost::multiprecision::cpp_int& root) {
  if (n < 0) return false;
  root = boost::multiprecision::sqrt(n);
  return root * root == n;
}

IrreducibilityResult exact_irreducibility(const AffineIFS& ifs) {
  std::vector<ExactMat2> letters;
  for (const auto& map : ifs.maps()) letters.push_back(*map.exact);
  const ExactMat2* pivot = nullptr;
  for (const auto& m : letters) {
    if (!m.is_zero() && !m.is_scalar()) {
      pivot = &m;
      break;
    }
  }
  IrreducibilityResult result;
  result.exact = true;
  if (!pivot) {
    result.common_line = Direction(0.0);
    return result;
  }
  const ExactMat2& a = *pivot;
  const Rational diff = a.a - a.d;
  const Rational disc = diff * diff + 4 * a.b * a.c;
  if (disc < 0) {
    result.irreducible = true;
    return result;
  }
  using boost::multiprecision::cpp_int;
  cpp_int num_root, den_root;
  const cpp_int num = boost::multiprecision::numerator(disc);
  const cpp_int den = boost::multiprecision::denominator(disc);
  if (is_perfect_square(num, num_root) && is_perfect_square(den, den_root)) {
    const Rational root(num_root, den_root);
    for (int sign : {1, -1}) {
      const Rational lambda = (a.trace() + sign * root) / 2;
      Rational vx = a.b, vy = lambda - a.a;
      if (vx == 0 && vy == 0) {
        vx = lambda - a.d;
        vy = a.c;
      }
      const bool common = std::all_of(letters.begin(), letters.end(), [&](const ExactMat2& m) {
        const Rational bx = m.a * vx + m.b * vy;
        const Rational by = m.c * vx + m.d * vy;
        return vx * by - vy * bx == 0;
      });
      if (common) {
        result.common_line = Direction::of({to_double(vx), to_double(vy)});
        return result;
      }
    }
    result.irreducible = true;
    return result;
  }
  // Irrational eigenlines: shared by another letter only if it commutes.
  const bool commute = std::all_of(letters.begin(), letters.end(),
                                   [&](const ExactMat2& m) { return m * a == a * m; });
  if (!commute) {
    result.irreducible = true;
    return result;
  }
  const auto dirs = eigen_directions(a.to_double(), ifs.rank_tolerance());
  result.common_line = dirs.empty() ? Direction(0.0) : dirs.front();
  return result;
}

}  // namespace

namespace {

/// Candidate lines of the first letter that does not fix every line; empty
/// when every letter fixes every line.
std::optional<std::vector<Direction>> candidate_lines(const AffineIFS& ifs) {
  const double tol = ifs.rank_tolerance();
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const Mat2& m = ifs.matrix(i);
    const int r = ifs.letter_rank(i);
    if (r == 0) continue;
    if (r == 1) {
      const auto form = rank_one_factor(m, tol);
      if (form.kernel_line.approx_equal(form.image_line, 1e-12)) return std::vector{form.image_line};
      return std::vector{form.kernel_line, form.image_line};
    }
    const double scale = m.max_abs();
    const bool scalar = std::abs(m.b) <= tol * scale && std::abs(m.c) <= tol * scale &&
                        std::abs(m.a - m.d) <= tol * scale;
    if (!scalar) return eigen_directions(m, tol);
  }
  return std::nullopt;
}

bool invariant_for_all(const AffineIFS& ifs, Direction line) {
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    if (!preserves_line(ifs.matrix(i), line, 1e-9)) return false;
  }
  return true;
}

}  // namespace

std::vector<Direction> common_invariant_lines(const AffineIFS& ifs) {
  const auto candidates = candidate_lines(ifs);
  if (!candidates) return {Direction(0.0), Direction(std::numbers::pi / 2)};
  std::vector<Direction> lines;
  for (const auto& line : *candidates) {
    if (invariant_for_all(ifs, line)) lines.push_back(line);
  }
  return lines;
}

IrreducibilityResult is_irreducible(const AffineIFS& ifs) {
  if (ifs.zero_letters().size() == ifs.size()) {
    throw PreconditionError("classify", "AllLettersZero",
                            "irreducibility needs at least one non-zero letter");
  }
  if (ifs.is_exact()) return exact_irreducibility(ifs);
  IrreducibilityResult result;
  const auto lines = common_invariant_lines(ifs);
  if (lines.empty()) {
    result.irreducible = true;
  } else {
    result.common_line = lines.front();
  }
  return result;
}

double irreducibility_delta(const AffineIFS& ifs, int grid_points) {
  double delta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_points; ++k) {
    const Vec2 x = Direction(kPi * k / grid_points).unit();
    double best = 0.0;
    for (const auto& m : ifs.matrices()) best = std::max(best, (m * x).norm());
    delta = std::min(delta, best);
  }
  return delta;
}

StrictAffinityResult is_strictly_affine(const AffineIFS& ifs, int max_depth, std::uint64_t node_budget) {
  if (!ifs.contains_invertible()) {
    throw PreconditionError("classify", "NoInvertibleLetters",
                            "strict affinity is only defined on the invertible letters");
  }
  StrictAffinityResult result;
  result.searched_depth = max_depth;
  NodeCounter counter(node_budget, "classify");
  WalkOptions options{SubshiftKind::Invertible, max_depth, false};
  std::size_t best_len = std::numeric_limits<std::size_t>::max();
  walk_tree(ifs, options, counter, [&](const TreeNode& node) {
    if (node.word.size() >= best_len) return false;
    if (is_proximal(node.product, ifs.rank_tolerance())) {
      best_len = node.word.size();
      result.witness = Word(node.word);
      return false;
    }
    return true;
  });
  return result;
}

JsrBounds jsr_bounds(const AffineIFS& ifs, int n, std::uint64_t node_budget) {
  if (n < 1) throw PreconditionError("classify", "InvalidDepth", "jsr_bounds needs n >= 1");
  if (full_tree_nodes(ifs.size(), n) > node_budget) {
    throw BudgetExceeded("classify", "joint spectral radius at depth " + std::to_string(n) +
                                         " exceeds the node budget of " + std::to_string(node_budget));
  }
  std::vector<double> level_max(static_cast<std::size_t>(n) + 1, 0.0);
  JsrBounds bounds;
  bounds.depth = n;
  NodeCounter counter(node_budget, "classify");
  WalkOptions options{SubshiftKind::Full, n, false};
  walk_tree(ifs, options, counter, [&](const TreeNode& node) {
    const std::size_t k = node.word.size();
    level_max[k] = std::max(level_max[k], node.norm);
    if (!node.zero) {
      const double rho = std::pow(spectral_radius(node.product), 1.0 / static_cast<double>(k));
      if (rho > bounds.lower) {
        bounds.lower = rho;
        bounds.lower_witness = Word(node.word);
      }
    }
    return true;
  });
  bounds.upper = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n; ++k) {
    bounds.upper = std::min(bounds.upper, std::pow(level_max[k], 1.0 / k));
  }
  // Guard against rounding in the k-th roots.
  bounds.lower = std::min(bounds.lower, bounds.upper);
  return bounds;
}

bool is_conformal_tuple(const AffineIFS& ifs) {
  for (const auto& m : ifs.matrices()) {
    if (!is_conformal(m, 1e-12)) return false;
  }
  return true;
}

std::string_view to_string(Prediction p) {
  switch (p) {
    case Prediction::Continuous:
      return "true";
    case Prediction::Discontinuous:
      return "false";
    case Prediction::Unavailable:
      break;
  }
  return "unavailable";
}

TupleClassification classify(const AffineIFS& ifs, const ClassifyConfig& config) {
  TupleClassification c;
  for (std::size_t i = 0; i < ifs.size(); ++i) c.rank_profile.push_back(ifs.letter_rank(i));
  c.contains_zero = !ifs.zero_letters().empty();
  c.contains_rank_one = ifs.contains_rank_one();
  c.contains_invertible = ifs.contains_invertible();
  c.contractive = ifs.is_contractive();
  c.conformal = is_conformal_tuple(ifs);

  const bool all_zero = ifs.zero_letters().size() == ifs.size();
  if (!all_zero) c.irreducibility = is_irreducible(ifs);
  if (!c.contains_zero) c.domination = find_domination_certificate(ifs, config.domination);
  c.strongly_irreducible = c.domination && c.irreducibility.irreducible &&
                           ifs.invertible_letters().size() == ifs.size();
  if (c.contains_invertible) {
    try {
      c.strictly_affine_witness =
          is_strictly_affine(ifs, config.strict_affinity_depth, config.node_budget).witness;
    } catch (const BudgetExceeded&) {
    }
  }
  c.nonzero_word = has_infinite_nonzero_word(ifs, config.automaton_depth, config.automaton);
  c.zero_product = find_zero_product(ifs, config.automaton_depth, config.automaton);

  int depth = config.jsr_depth;
  const std::uint64_t jsr_budget = std::min<std::uint64_t>(config.node_budget, 2'000'000);
  while (depth > 1 && full_tree_nodes(ifs.size(), depth) > jsr_budget) --depth;
  if (depth >= 1 && full_tree_nodes(ifs.size(), depth) <= jsr_budget) c.jsr = jsr_bounds(ifs, depth, jsr_budget);

  switch (c.zero_product.status) {
    case ZeroProductResult::Status::Found:
      c.continuity_at_zero = {Prediction::Discontinuous,
                              "the product " + c.zero_product.witness.to_string() + " is the zero matrix"};
      break;
    case ZeroProductResult::Status::None:
      c.continuity_at_zero = {Prediction::Continuous, "no product of the letters is the zero matrix"};
      break;
    case ZeroProductResult::Status::Inconclusive:
      if (c.domination) {
        c.continuity_at_zero = {Prediction::Continuous, "dominated tuples have no zero products"};
      } else {
        c.continuity_at_zero = {Prediction::Unavailable, "zero-product search inconclusive"};
      }
      break;
  }

  if (c.domination || c.irreducibility.irreducible) {
    const std::string basis = c.domination ? "dominated" : "irreducible";
    if (c.contains_rank_one) {
      c.continuity_at_one = {Prediction::Discontinuous, basis + " tuple with a rank-one letter"};
    } else {
      c.continuity_at_one = {Prediction::Continuous, basis + " tuple without rank-one letters"};
    }
  } else {
    c.continuity_at_one = {Prediction::Unavailable, "neither domination nor irreducibility established"};
  }
  return c;
}

std::string format_report(const TupleClassification& c, const AffineIFS& ifs) {
  std::ostringstream out;
  auto yes_no = [](bool b) { return b ? "true" : "false"; };
  out << "name: " << ifs.name() << '\n';
  out << "letters: " << ifs.size() << '\n';
  out << "rankProfile:";
  for (int r : c.rank_profile) out << ' ' << r;
  out << '\n';
  out << "containsZero: " << yes_no(c.contains_zero) << '\n';
  out << "containsRankOne: " << yes_no(c.contains_rank_one) << '\n';
  out << "containsInvertible: " << yes_no(c.contains_invertible) << '\n';
  out << "contractive: " << yes_no(c.contractive) << '\n';
  out << "conformal: " << yes_no(c.conformal) << '\n';
  out << "irreducible: " << (c.irreducibility.irreducible ? "yes" : "no") << '\n';
  out << "irreducibleExact: " << yes_no(c.irreducibility.exact) << '\n';
  if (c.irreducibility.common_line) {
    out << "commonLine: " << format_number(c.irreducibility.common_line->angle()) << '\n';
  }
  if (c.domination) {
    out << "dominated: certified\n";
    out << "multicone:";
    for (const auto& iv : c.domination->multicone) {
      out << " [" << format_number(iv.start) << ',' << format_number(iv.start + iv.width) << ']';
    }
    out << '\n';
    out << "kappa: " << format_number(c.domination->kappa) << '\n';
    out << "kappaVerifiedDepth: " << c.domination->verified_depth << '\n';
    out << "observedConeRatio: " << format_number(c.domination->observed_ratio) << '\n';
  } else {
    out << "dominated: inconclusive\n";
  }
  out << "stronglyIrreducible: " << (c.strongly_irreducible ? "yes" : "inconclusive") << '\n';
  out << "strictlyAffine: "
      << (c.strictly_affine_witness ? "witness " + c.strictly_affine_witness->to_string() : "inconclusive")
      << '\n';
  switch (c.nonzero_word.status) {
    case NonzeroWordResult::Status::Yes: {
      const auto letters = c.nonzero_word.witness.letters();
      const Word head(letters.first(c.nonzero_word.cycle_start));
      const Word period(letters.subspan(c.nonzero_word.cycle_start));
      out << "infiniteNonzeroWord: yes " << head.to_string() << '(' << period.to_string() << ")^inf\n";
      break;
    }
    case NonzeroWordResult::Status::No:
      out << "infiniteNonzeroWord: no depth " << c.nonzero_word.depth << '\n';
      break;
    case NonzeroWordResult::Status::Inconclusive:
      out << "infiniteNonzeroWord: inconclusive\n";
      break;
  }
  switch (c.zero_product.status) {
    case ZeroProductResult::Status::Found:
      out << "zeroProduct: " << c.zero_product.witness.to_string() << '\n';
      break;
    case ZeroProductResult::Status::None:
      out << "zeroProduct: none\n";
      break;
    case ZeroProductResult::Status::Inconclusive:
      out << "zeroProduct: inconclusive\n";
      break;
  }
  if (c.jsr) {
    out << "jsrLower: " << format_number(c.jsr->lower) << '\n';
    out << "jsrUpper: " << format_number(c.jsr->upper) << '\n';
    out << "jsrDepth: " << c.jsr->depth << '\n';
  }
  out << "continuityAtZero: " << to_string(c.continuity_at_zero.value) << '\n';
  out << "continuityAtZeroReason: " << c.continuity_at_zero.reason << '\n';
  out << "continuityAtOne: " << to_string(c.continuity_at_one.value) << '\n';
  out << "continuityAtOneReason: " << c.continuity_at_one.reason << '\n';
  return out.str();
}

}  // namespace affthermo
