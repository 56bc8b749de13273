#include "affthermo/pressure.hpp"

#include "affthermo/format.hpp"
#include "affthermo/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace affthermo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void neumaier_add(double& sum, double& comp, double term) {
  const double t = sum + term;
  if (std::abs(sum) >= std::abs(term)) {
    comp += (sum - t) + term;
  } else {
    comp += (term - t) + sum;
  }
  sum = t;
}

}  // namespace

void LogSum::rescale(double new_reference) {
  if (reference_ == -kInf) {
    reference_ = new_reference;
    sum_ = 0.0;
    compensation_ = 0.0;
    return;
  }
  const double f = std::exp(reference_ - new_reference);
  sum_ *= f;
  compensation_ *= f;
  reference_ = new_reference;
}

void LogSum::add_log(double log_term) {
  if (log_term == -kInf) return;
  if (log_term > reference_) rescale(log_term);
  neumaier_add(sum_, compensation_, std::exp(log_term - reference_));
}

void LogSum::merge(const LogSum& other) {
  if (other.empty()) return;
  if (other.reference_ > reference_) rescale(other.reference_);
  const double f = std::exp(other.reference_ - reference_);
  neumaier_add(sum_, compensation_, other.sum_ * f);
  neumaier_add(sum_, compensation_, other.compensation_ * f);
}

double LogSum::value() const {
  if (reference_ == -kInf) return -kInf;
  return reference_ + std::log(sum_ + compensation_);
}

std::string_view to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::None:
      return "none";
    case CertificateKind::Domination:
      return "domination";
    case CertificateKind::Conformal:
      return "conformal";
    case CertificateKind::PeriodicOrbit:
      return "periodic";
    case CertificateKind::InvariantLine:
      return "line";
    case CertificateKind::Determinant:
      return "determinant";
    case CertificateKind::ZeroExponent:
      return "zero-exponent";
  }
  return "none";
}

std::string describe(const PressureCertificate& cert) {
  std::string out(to_string(cert.kind));
  switch (cert.kind) {
    case CertificateKind::Domination:
      out += ":kappa=" + format_number(cert.kappa);
      break;
    case CertificateKind::PeriodicOrbit: {
      std::string w = cert.orbit.to_string();
      std::replace(w.begin(), w.end(), ',', '-');
      out += ":" + w;
      break;
    }
    case CertificateKind::InvariantLine:
      if (cert.line) out += ":angle=" + format_number(cert.line->angle());
      break;
    default:
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double log_phi(double log_alpha1, double log_det, double s) {
  if (s == 0.0) return 0.0;
  if (s <= 1.0) return s * log_alpha1;
  if (s <= 2.0) {
    if (log_det == -kInf) return -kInf;
    return (2.0 - s) * log_alpha1 + (s - 1.0) * log_det;
  }
  return 0.5 * s * log_det;
}

struct LevelSums {
  /// sums[k] for k = 1..n (index 0 unused).
  std::vector<LogSum> sums;
  double best_periodic = -kInf;
  Word periodic_word;
};

/// One walk over the tree of `walk_kind`, accumulating the level sums of
/// phi^s and the best periodic-orbit bound. Sharded by root letter; shards
/// are merged in root order so the result does not depend on the thread
/// count.
LevelSums level_sums(const AffineIFS& ifs, SubshiftKind walk_kind, double s, int n,
                     std::uint64_t node_budget) {
  const auto roots = alphabet_for(ifs, walk_kind);
  if (walk_kind != SubshiftKind::Sigma && full_tree_nodes(roots.size(), n) > node_budget) {
    throw BudgetExceeded("pressure", "level sums over " + std::to_string(roots.size()) + "^" +
                                         std::to_string(n) + " words exceed the node budget of " +
                                         std::to_string(node_budget));
  }
  NodeCounter counter(node_budget, "pressure");
  const WalkOptions options{walk_kind, n, false};
  std::vector<LevelSums> shards(roots.size());

  auto run_shard = [&](std::size_t r) {
    LevelSums& part = shards[r];
    part.sums.assign(static_cast<std::size_t>(n) + 1, LogSum{});
    walk_subtree(ifs, options, roots[r], counter, [&](const TreeNode& node) {
      if (node.zero) return false;
      const std::size_t k = node.word.size();
      const double la = std::log(node.norm);
      const double ld = node.abs_det > 0.0 ? std::log(node.abs_det) : -kInf;
      part.sums[k].add_log(log_phi(la, ld, s));
      const double rho = spectral_radius(node.product);
      if (rho > 0.0) {
        const double lr = std::log(rho);
        const double bound = log_phi(lr, ld, s) / static_cast<double>(k);
        if (bound > part.best_periodic) {
          part.best_periodic = bound;
          part.periodic_word = Word(node.word);
        }
      }
      return true;
    });
  };

  run_sharded(roots.size(), run_shard);

  LevelSums total;
  total.sums.assign(static_cast<std::size_t>(n) + 1, LogSum{});
  for (auto& part : shards) {
    if (part.sums.empty()) continue;
    for (int k = 1; k <= n; ++k) total.sums[k].merge(part.sums[k]);
    if (part.best_periodic > total.best_periodic) {
      total.best_periodic = part.best_periodic;
      total.periodic_word = part.periodic_word;
    }
  }
  return total;
}

/// Discretised transfer operator on the image cone C0 of a domination
/// certificate. For y in C0 let f_k(y) = sum over words of length k of
/// |A_w y|^e |det A_w|^(s-1) (e = s for s <= 1, e = 2 - s above). Every word
/// satisfies kappa ||A_w|| <= |A_w y| <= ||A_w||, so f_k is comparable to the
/// level sum, and moving y by an angle t changes each term by a factor in
/// [(1 - t/kappa)^e, (1 + t/kappa)^e]. Snapping A_i y to the nearest grid
/// line therefore gives a positive matrix M with c_lo M <= L <= c_hi M, and a
/// positive vector h yields P >= log(c_lo min (Mh/h)) and
/// P <= log(c_hi max (Mh/h)).
struct TransferGrid {
  std::size_t points = 0;
  std::size_t letters = 0;
  std::vector<std::uint32_t> target;  ///< [i * points + j]
  std::vector<double> log_stretch;    ///< log |A_i y_j|
  std::vector<double> log_det;        ///< per letter
  double delta = 0.0;                 ///< largest snapping angle
  double kappa = 0.0;
};

double line_distance(double a, double b) {
  const double d = std::abs(wrap_pi(a - b));
  return std::min(d, std::numbers::pi - d);
}

std::optional<TransferGrid> build_transfer_grid(const AffineIFS& tuple, const DominationCertificate& cert,
                                                std::size_t resolution = 32768) {
  const Multicone cone = image_cone(tuple, cert.multicone);
  double total = 0.0;
  for (const auto& iv : cone) total += iv.width;
  std::vector<double> angles;
  std::vector<std::pair<std::size_t, double>> layout;  // first index, spacing
  for (const auto& iv : cone) {
    const std::size_t count =
        iv.width > 0.0 && total > 0.0
            ? std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(resolution * iv.width / total)))
            : 1;
    const double step = count > 1 ? iv.width / static_cast<double>(count - 1) : 0.0;
    layout.emplace_back(angles.size(), step);
    for (std::size_t j = 0; j < count; ++j) angles.push_back(wrap_pi(iv.start + step * static_cast<double>(j)));
  }
  TransferGrid g;
  g.points = angles.size();
  g.letters = tuple.size();
  g.kappa = cert.kappa;
  g.target.resize(g.points * g.letters);
  g.log_stretch.resize(g.points * g.letters);
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const double det = std::abs(tuple.matrix(i).det());
    g.log_det.push_back(det > 0.0 ? std::log(det) : -kInf);
    for (std::size_t j = 0; j < g.points; ++j) {
      const Vec2 v = tuple.matrix(i) * Vec2{std::cos(angles[j]), std::sin(angles[j])};
      const double len = v.norm();
      if (!(len > 0.0)) return std::nullopt;
      const double a = wrap_pi(std::atan2(v.y, v.x));
      std::size_t best = 0;
      double best_dist = kInf;
      for (std::size_t c = 0; c < cone.size(); ++c) {
        const auto [first, step] = layout[c];
        const std::size_t count = (c + 1 < cone.size() ? layout[c + 1].first : g.points) - first;
        double offset = wrap_pi(a - cone[c].start);
        if (offset > cone[c].width) offset = offset - cone[c].width < std::numbers::pi - offset ? cone[c].width : 0.0;
        const std::size_t k =
            step > 0.0 ? std::min(count - 1, static_cast<std::size_t>(std::lround(offset / step))) : 0;
        const double dist = line_distance(a, angles[first + k]);
        if (dist < best_dist) {
          best_dist = dist;
          best = first + k;
        }
      }
      g.target[i * g.points + j] = static_cast<std::uint32_t>(best);
      g.log_stretch[i * g.points + j] = std::log(len);
      g.delta = std::max(g.delta, best_dist);
    }
  }
  // Outward rounding for the angle arithmetic above.
  g.delta += 1e-12;
  if (g.delta >= g.kappa) return std::nullopt;
  return g;
}

/// Rigorous (lower, upper) pressure bounds from the grid for 0 < s < 2.
std::pair<double, double> transfer_bounds(const TransferGrid& g, double s) {
  const double e = s <= 1.0 ? s : 2.0 - s;
  const std::size_t np = g.points;
  std::vector<double> weight(np * g.letters);
  for (std::size_t i = 0; i < g.letters; ++i) {
    const double ld = s > 1.0 ? (s - 1.0) * g.log_det[i] : 0.0;
    for (std::size_t j = 0; j < np; ++j) weight[i * np + j] = std::exp(e * g.log_stretch[i * np + j] + ld);
  }
  std::vector<double> h(np, 1.0), next(np);
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < g.letters; ++i) {
      const double* w = &weight[i * np];
      const std::uint32_t* t = &g.target[i * np];
      for (std::size_t j = 0; j < np; ++j) out[j] += w[j] * in[t[j]];
    }
  };
  double lo_ratio = 0.0, hi_ratio = kInf;
  for (int iter = 0; iter < 2000; ++iter) {
    apply(h, next);
    lo_ratio = kInf;
    hi_ratio = 0.0;
    double top = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      const double r = next[j] / h[j];
      lo_ratio = std::min(lo_ratio, r);
      hi_ratio = std::max(hi_ratio, r);
      top = std::max(top, next[j]);
    }
    if (!(top > 0.0)) return {-kInf, kInf};
    if (hi_ratio - lo_ratio <= 1e-13 * hi_ratio) break;
    for (std::size_t j = 0; j < np; ++j) h[j] = std::max(next[j] / top, 1e-300);
  }
  const double t = g.delta / g.kappa;
  // A little slack covers the floating point error in the ratios.
  const double lower = std::log(lo_ratio) + e * std::log1p(-t) - 1e-12;
  const double upper = std::log(hi_ratio) + e * std::log1p(t) + 1e-12;
  return {lower, upper};
}

/// Certificates for one effective word space, computed once and reused
/// across exponents and depths.
struct CertContext {
  AffineIFS tuple;  ///< letters of the effective word space
  bool empty = false;
  bool conformal = false;
  bool whole_tuple_dominated = false;
  std::optional<DominationCertificate> domination;
  std::optional<TransferGrid> transfer;
  std::vector<Direction> lines;
};

CertContext make_context(const AffineIFS& ifs, SubshiftKind eff, const PressureOptions& options) {
  CertContext ctx;
  if (eff == SubshiftKind::Invertible) {
    const auto inv = ifs.invertible_letters();
    if (inv.empty()) {
      ctx.empty = true;
      return ctx;
    }
    ctx.tuple = ifs.restricted_to(inv);
  } else {
    ctx.tuple = ifs;
  }
  ctx.conformal = is_conformal_tuple(ctx.tuple);
  const bool has_zero = !ctx.tuple.zero_letters().empty();
  if (options.domination && !has_zero) {
    const auto check = certify_multicone(ctx.tuple, options.domination->multicone, options.domination_search);
    if (!check || options.domination->kappa > check->kappa * (1.0 + 1e-9)) {
      throw PreconditionError("pressure", "InvalidCertificate",
                              "the supplied multicone does not re-verify with the stated kappa");
    }
    ctx.domination = *options.domination;
  } else if (options.domination && has_zero) {
    throw PreconditionError("pressure", "InvalidCertificate",
                            "a domination certificate cannot hold for a tuple with a zero letter");
  } else if (options.auto_certify && !has_zero) {
    ctx.domination = find_domination_certificate(ctx.tuple, options.domination_search);
  }
  ctx.whole_tuple_dominated = ctx.domination && ctx.tuple.size() == ifs.size();
  if (ctx.domination) ctx.transfer = build_transfer_grid(ctx.tuple, *ctx.domination);
  if (options.auto_certify && ctx.tuple.zero_letters().size() < ctx.tuple.size()) {
    ctx.lines = common_invariant_lines(ctx.tuple);
  }
  return ctx;
}

/// log of the growth rate along a common invariant line.
double invariant_line_bound(const AffineIFS& tuple, Direction line, double s, SubshiftKind kind) {
  const Vec2 u = line.unit();
  LogSum sum;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const double lambda = (tuple.matrix(i) * u).norm();
    if (lambda <= tuple.rank_tolerance() * std::max(tuple.letter_norm(i), 1e-300)) {
      if (s == 0.0 && kind == SubshiftKind::Full) sum.add_log(0.0);
      continue;
    }
    if (s <= 1.0) {
      sum.add_log(s * std::log(lambda));
    } else if (s <= 2.0) {
      if (tuple.letter_rank(i) != 2) continue;
      const double ld = std::log(std::abs(tuple.matrix(i).det()));
      sum.add_log((2.0 - s) * std::log(lambda) + (s - 1.0) * ld);
    }
  }
  return sum.value();
}

class Estimator {
 public:
  Estimator(const AffineIFS& ifs, const PressureOptions& options) : ifs_(ifs), options_(options) {}

  PressureEstimate estimate(SubshiftKind kind, double s, int n) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw PreconditionError("pressure", "DomainError", "the exponent s must be finite and >= 0");
    }
    if (n < 1) throw PreconditionError("pressure", "DomainError", "the depth n must be >= 1");
    PressureEstimate est;
    est.s = s;
    est.kind = kind;
    est.depth = n;

    if (s == 0.0 && kind != SubshiftKind::Sigma) {
      const std::size_t count =
          kind == SubshiftKind::Full ? ifs_.size() : ifs_.invertible_letters().size();
      est.lower = est.upper = count == 0 ? -kInf : std::log(static_cast<double>(count));
      est.certificate.kind = CertificateKind::ZeroExponent;
      return est;
    }

    // For s > 1 only invertible words carry phi^s > 0.
    const SubshiftKind eff = s > 1.0 ? SubshiftKind::Invertible : kind;
    const CertContext& ctx = context(eff);
    if (ctx.empty) {
      est.lower = est.upper = -kInf;
      return est;
    }
    const SubshiftKind walk_kind = eff == SubshiftKind::Invertible ? SubshiftKind::Invertible
                                                                    : SubshiftKind::Sigma;
    const LevelSums sums = level_sums(ifs_, walk_kind, s, n, options_.node_budget);

    est.upper = kInf;
    double dom_lower = -kInf;
    const double log_kappa2 = ctx.domination ? 2.0 * std::log(ctx.domination->kappa) : -kInf;
    for (int k = 1; k <= n; ++k) {
      const double ls = sums.sums[k].value();
      est.upper = std::min(est.upper, ls / k);
      if (ctx.domination && ls > -kInf) dom_lower = std::max(dom_lower, (ls + log_kappa2) / k);
    }
    if (est.upper == -kInf) {
      est.lower = -kInf;
      return est;
    }

    if (s == 0.0 && ctx.whole_tuple_dominated) {
      // Dominated tuples have no zero products, so Sigma is the full shift.
      est.lower = est.upper = std::log(static_cast<double>(ifs_.size()));
      est.certificate.kind = CertificateKind::ZeroExponent;
      return est;
    }
    double transfer_lower = -kInf;
    if (ctx.transfer && s > 0.0 && s < 2.0 && !ctx.conformal) {
      const auto [lo, up] = transfer_bounds(*ctx.transfer, s);
      transfer_lower = lo;
      est.upper = std::min(est.upper, up);
    }
    if (ctx.conformal || s >= 2.0) {
      est.lower = est.upper;
      est.certificate.kind = ctx.conformal ? CertificateKind::Conformal : CertificateKind::Determinant;
      return est;
    }

    est.lower = -kInf;
    auto offer = [&](double value, PressureCertificate cert) {
      if (value > est.lower) {
        est.lower = value;
        est.certificate = std::move(cert);
      }
    };
    if (ctx.domination) {
      offer(std::max(dom_lower, transfer_lower),
            {CertificateKind::Domination, ctx.domination->kappa, {}, std::nullopt});
    }
    for (const auto& line : ctx.lines) {
      offer(invariant_line_bound(ctx.tuple, line, s, eff),
            {CertificateKind::InvariantLine, 0.0, {}, line});
    }
    offer(sums.best_periodic, {CertificateKind::PeriodicOrbit, 0.0, sums.periodic_word, std::nullopt});
    // Bounds that agree up to rounding are reported as equal.
    est.lower = std::min(est.lower, est.upper);
    return est;
  }

 private:
  const CertContext& context(SubshiftKind eff) {
    auto it = contexts_.find(eff);
    if (it == contexts_.end()) it = contexts_.emplace(eff, make_context(ifs_, eff, options_)).first;
    return it->second;
  }

  const AffineIFS& ifs_;
  const PressureOptions& options_;
  std::map<SubshiftKind, CertContext> contexts_;
};

}  // namespace

PressureEstimate pressure_estimate(const AffineIFS& ifs, SubshiftKind kind, double s, int n,
                                   const PressureOptions& options) {
  Estimator estimator(ifs, options);
  return estimator.estimate(kind, s, n);
}

PressureEstimate pressure_dispatch(const AffineIFS& ifs, double s, int n, const PressureOptions& options) {
  const SubshiftKind kind = s == 0.0  ? SubshiftKind::Full
                            : s <= 1.0 ? SubshiftKind::Sigma
                                       : SubshiftKind::Invertible;
  return pressure_estimate(ifs, kind, s, n, options);
}

std::vector<PressureEstimate> pressure_curve(const AffineIFS& ifs, SubshiftKind kind, double s_from,
                                             double s_to, int steps, int n,
                                             const PressureOptions& options) {
  if (steps < 1) throw PreconditionError("pressure", "DomainError", "a pressure curve needs steps >= 1");
  Estimator estimator(ifs, options);
  std::vector<PressureEstimate> rows;
  for (int i = 0; i < steps; ++i) {
    const double s = steps == 1 ? s_from : s_from + (s_to - s_from) * i / (steps - 1);
    rows.push_back(estimator.estimate(kind, s, n));
  }
  return rows;
}

void write_pressure_csv(std::ostream& out, const std::vector<PressureEstimate>& rows) {
  out << "s,lower,upper,depth,certificate,kind\n";
  for (const auto& r : rows) {
    out << format_number(r.s) << ',' << format_number(r.lower) << ',' << format_number(r.upper) << ','
        << r.depth << ',' << describe(r.certificate) << ',' << to_string(r.kind) << '\n';
  }
}

// ---------------------------------------------------------------------------

AffinityDimension affinity_dimension(const AffineIFS& ifs, SubshiftKind kind, double tol,
                                     const AffinityOptions& options) {
  if (!ifs.is_contractive()) {
    throw PreconditionError("pressure", "NotContractive",
                            "affinity dimension needs max ||A_i|| < 1, got " +
                                format_number(ifs.max_norm()));
  }
  if (!(tol > 0.0)) throw PreconditionError("pressure", "DomainError", "tol must be positive");

  Estimator estimator(ifs, options.pressure);
  const std::uint64_t budget = options.pressure.node_budget;
  auto feasible = [&](int depth) {
    return full_tree_nodes(ifs.size(), depth) <= budget && depth <= options.max_depth;
  };
  int max_depth = 1;
  while (feasible(max_depth + 1)) ++max_depth;

  AffinityDimension result;
  result.kind = kind;
  int depth = std::clamp(options.initial_depth, 1, max_depth);
  result.depth = depth;
  double lo = 0.0;
  double hi = 4.0;

  auto deepen = [&]() {
    if (depth >= max_depth) {
      result.lo = lo;
      result.hi = hi;
      throw InconclusiveBracket(result, "bounds still straddle 0 at the deepest feasible depth " +
                                            std::to_string(depth) + "; best bracket [" +
                                            format_number(lo) + ", " + format_number(hi) + "]");
    }
    depth = std::min(2 * depth, max_depth);
    result.depth = depth;
  };

  // Push hi up until the pressure there is certainly negative.
  for (;;) {
    const auto e = estimator.estimate(kind, hi, depth);
    if (e.upper < 0.0) break;
    if (e.lower >= 0.0) {
      if (e.lower > 0.0) lo = hi;
      hi *= 2.0;
      if (hi > 256.0) {
        result.lo = lo;
        result.hi = hi;
        throw InconclusiveBracket(result, "pressure stays non-negative up to s = 256");
      }
      continue;
    }
    deepen();
  }

  // P is strictly decreasing, so the certified sets {lower > 0} and
  // {upper < 0} are intervals; each end is bisected on its own predicate.
  for (;;) {
    double a = lo, b = hi;
    while (b - a > 0.25 * tol) {
      const double mid = 0.5 * (a + b);
      (estimator.estimate(kind, mid, depth).lower > 0.0 ? a : b) = mid;
    }
    lo = a;
    a = lo;
    b = hi;
    while (b - a > 0.25 * tol) {
      const double mid = 0.5 * (a + b);
      (estimator.estimate(kind, mid, depth).upper < 0.0 ? b : a) = mid;
    }
    hi = b;
    if (hi - lo <= tol) break;
    deepen();
  }
  result.lo = lo;
  result.hi = hi;
  return result;
}

// ---------------------------------------------------------------------------

PressureGap pressure_gap(const AffineIFS& ifs, double s, const GapOptions& options) {
  if (!ifs.contains_rank_one()) {
    throw PreconditionError("pressure", "MissingRankOne", "the pressure gap needs a rank-one letter");
  }
  if (!ifs.contains_invertible()) {
    throw PreconditionError("pressure", "MissingInvertible", "the pressure gap needs an invertible letter");
  }
  if (!(s >= 0.0 && s <= 1.0)) {
    throw PreconditionError("pressure", "DomainError", "the pressure gap is defined for s in [0, 1]");
  }
  Estimator estimator(ifs, options.pressure);
  PressureGap gap;
  auto attempt = [&](int depth) {
    gap.depth = depth;
    gap.full = estimator.estimate(SubshiftKind::Full, s, depth);
    gap.invertible = estimator.estimate(SubshiftKind::Invertible, s, depth);
    gap.lower_full = gap.full.lower;
    gap.upper_inv = gap.invertible.upper;
    if (gap.lower_full > gap.upper_inv) gap.status = PressureGap::Status::CertifiedGap;
    return gap.status == PressureGap::Status::CertifiedGap;
  };
  if (s == 0.0) {
    attempt(1);
    return gap;
  }
  for (int depth = 2; depth <= options.max_depth; depth += 2) {
    if (attempt(depth)) return gap;
  }
  if (options.max_depth % 2 == 1) attempt(options.max_depth);
  return gap;
}

// ---------------------------------------------------------------------------

std::string_view to_string(MeasureProvenance p) {
  switch (p) {
    case MeasureProvenance::GibbsPhi:
      return "gibbs-phi";
    case MeasureProvenance::Bernoulli:
      return "bernoulli";
    case MeasureProvenance::Uniform:
      return "uniform";
    case MeasureProvenance::Custom:
      break;
  }
  return "custom";
}

namespace {

void check_unit_mass(const std::vector<double>& weights, const char* what) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw PreconditionError("pressure", "InvalidMeasure", std::string(what) + " must be non-negative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw PreconditionError("pressure", "InvalidMeasure",
                            std::string(what) + " must sum to 1, got " + format_number(total));
  }
}

}  // namespace

CylinderMeasure CylinderMeasure::uniform(const AffineIFS& ifs, SubshiftKind kind, int n) {
  const auto level = enumerate_level(ifs, kind, n);
  if (level.entries.empty()) {
    throw PreconditionError("pressure", "EmptySigma", "the level set is empty");
  }
  CylinderMeasure mu;
  mu.kind = kind;
  mu.depth = n;
  mu.provenance = MeasureProvenance::Uniform;
  const double w = 1.0 / static_cast<double>(level.entries.size());
  for (const auto& e : level.entries) {
    mu.words.push_back(e.word);
    mu.weights.push_back(w);
  }
  return mu;
}

CylinderMeasure CylinderMeasure::bernoulli(const AffineIFS& ifs, const std::vector<double>& p, int n) {
  if (p.size() != ifs.size()) {
    throw PreconditionError("pressure", "InvalidMeasure", "one probability per letter is required");
  }
  check_unit_mass(p, "Bernoulli probabilities");
  const auto level = enumerate_level(ifs, SubshiftKind::Full, n);
  CylinderMeasure mu;
  mu.kind = SubshiftKind::Full;
  mu.depth = n;
  mu.provenance = MeasureProvenance::Bernoulli;
  for (const auto& e : level.entries) {
    double w = 1.0;
    for (Letter l : e.word.letters()) w *= p[l];
    mu.words.push_back(e.word);
    mu.weights.push_back(w);
  }
  return mu;
}

CylinderMeasure CylinderMeasure::custom(SubshiftKind kind, std::vector<Word> words, std::vector<double> weights) {
  if (words.empty() || words.size() != weights.size()) {
    throw PreconditionError("pressure", "InvalidMeasure", "words and weights must be non-empty and match");
  }
  const std::size_t n = words.front().size();
  for (const auto& w : words) {
    if (w.size() != n || n == 0) {
      throw PreconditionError("pressure", "DepthMismatch", "all words of a cylinder measure share one length");
    }
  }
  check_unit_mass(weights, "cylinder weights");
  CylinderMeasure mu;
  mu.kind = kind;
  mu.depth = static_cast<int>(n);
  mu.words = std::move(words);
  mu.weights = std::move(weights);
  return mu;
}

CylinderMeasure gibbs_weights(const AffineIFS& ifs, double s, int n, std::uint64_t node_budget) {
  if (!(s >= 0.0)) throw PreconditionError("pressure", "DomainError", "s must be >= 0");
  const auto level = enumerate_level(ifs, SubshiftKind::Sigma, n, node_budget);
  std::vector<double> logs;
  double top = -kInf;
  for (const auto& e : level.entries) {
    const double lp = log_svf_phi(singular_values(e.product).first, std::abs(e.product.det()), s);
    logs.push_back(lp);
    top = std::max(top, lp);
  }
  if (top == -kInf) {
    throw PreconditionError("pressure", "EmptySigma",
                            "no word of length " + std::to_string(n) + " carries positive weight");
  }
  CylinderMeasure mu;
  mu.kind = SubshiftKind::Sigma;
  mu.depth = n;
  mu.provenance = MeasureProvenance::GibbsPhi;
  mu.parameter = s;
  double total = 0.0;
  for (std::size_t i = 0; i < level.entries.size(); ++i) {
    mu.words.push_back(level.entries[i].word);
    mu.weights.push_back(std::exp(logs[i] - top));
    total += mu.weights.back();
  }
  for (double& w : mu.weights) w /= total;
  return mu;
}

QuasiMultiplicativity quasi_multiplicativity(const AffineIFS& ifs, double s, int n, std::uint64_t node_budget) {
  if (n < 2) throw PreconditionError("pressure", "DomainError", "quasi-multiplicativity needs n >= 2");
  const auto level = enumerate_level(ifs, SubshiftKind::Sigma, n, node_budget);
  QuasiMultiplicativity q{kInf, 0.0};
  const std::size_t m = static_cast<std::size_t>(n) / 2;
  for (const auto& e : level.entries) {
    const auto letters = e.word.letters();
    const double whole = svf_phi(e.product, s);
    const double head = svf_phi(word_product(ifs, Word(letters.first(m))), s);
    const double tail = svf_phi(word_product(ifs, Word(letters.subspan(m))), s);
    if (head <= 0.0 || tail <= 0.0) continue;
    const double r = whole / (head * tail);
    q.min_ratio = std::min(q.min_ratio, r);
    q.max_ratio = std::max(q.max_ratio, r);
  }
  if (q.min_ratio == kInf) {
    throw PreconditionError("pressure", "EmptySigma", "no word with positive weight at this depth");
  }
  return q;
}

MeasureDiagnostics measure_diagnostics(const AffineIFS& ifs, const CylinderMeasure& mu, double s,
                                       std::uint64_t node_budget) {
  const int n = mu.depth;
  if (n < 1 || mu.words.size() != mu.weights.size()) {
    throw PreconditionError("pressure", "DepthMismatch", "the measure has no valid level");
  }
  MeasureDiagnostics d;
  double entropy = 0.0;
  double energy = 0.0;
  for (std::size_t i = 0; i < mu.words.size(); ++i) {
    const Word& w = mu.words[i];
    if (static_cast<int>(w.size()) != n) {
      throw PreconditionError("pressure", "DepthMismatch",
                              "word " + w.to_string() + " has length " + std::to_string(w.size()) +
                                  ", expected " + std::to_string(n));
    }
    for (Letter l : w.letters()) {
      if (l >= ifs.size() || (mu.kind == SubshiftKind::Invertible && ifs.letter_rank(l) != 2)) {
        throw PreconditionError("pressure", "DepthMismatch",
                                "word " + w.to_string() + " is not a word of the " +
                                    std::string(to_string(mu.kind)) + " shift");
      }
    }
    const double p = mu.weights[i];
    if (p <= 0.0) continue;
    const Mat2 product = word_product(ifs, w);
    if (mu.kind == SubshiftKind::Sigma && rank(product, ifs.rank_tolerance()) == 0) {
      throw PreconditionError("pressure", "DepthMismatch",
                              "word " + w.to_string() + " has a zero product and is not in Sigma");
    }
    entropy -= p * std::log(p);
    energy += p * log_svf_phi(singular_values(product).first, std::abs(product.det()), s);
  }
  d.entropy_rate = entropy / n;
  d.energy_rate = energy / n;

  if (s == 0.0 && mu.kind == SubshiftKind::Full) {
    d.level_pressure = std::log(static_cast<double>(ifs.size()));
  } else if (s == 0.0 && mu.kind == SubshiftKind::Invertible) {
    const auto count = ifs.invertible_letters().size();
    d.level_pressure = count == 0 ? -kInf : std::log(static_cast<double>(count));
  } else {
    const SubshiftKind walk_kind = (s > 1.0 || mu.kind == SubshiftKind::Invertible)
                                       ? SubshiftKind::Invertible
                                       : SubshiftKind::Sigma;
    d.level_pressure = level_sums(ifs, walk_kind, s, n, node_budget).sums[n].value() / n;
  }
  d.jensen_holds = d.entropy_rate + d.energy_rate <= d.level_pressure + 1e-9;
  return d;
}

}  // namespace affthermo
