#include "affthermo/ifs.hpp"

#include "affthermo/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>

namespace affthermo {

std::string_view to_string(SubshiftKind kind) {
  switch (kind) {
    case SubshiftKind::Full: return "full";
    case SubshiftKind::Sigma: return "sigma";
    case SubshiftKind::Invertible: return "invertible";
  }
  return "unknown";
}

std::optional<SubshiftKind> parse_subshift_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "full") return SubshiftKind::Full;
  if (lower == "sigma" || lower == "nonzero") return SubshiftKind::Sigma;
  if (lower == "invertible") return SubshiftKind::Invertible;
  return std::nullopt;
}

Word Word::parse(std::string_view text) {
  std::vector<Letter> letters;
  auto push = [&](std::string_view token) {
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value > 255) {
      throw std::invalid_argument("invalid letter '" + std::string(token) + "'");
    }
    letters.push_back(static_cast<Letter>(value));
  };
  if (text.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = std::min(text.find(',', start), text.size());
      push(text.substr(start, end - start));
      start = end + 1;
    }
  } else {
    for (std::size_t i = 0; i < text.size(); ++i) push(text.substr(i, 1));
  }
  return Word(std::move(letters));
}

Word Word::operator+(const Word& tail) const {
  std::vector<Letter> out = letters_;
  out.insert(out.end(), tail.letters_.begin(), tail.letters_.end());
  return Word(std::move(out));
}

Word Word::prefix(std::size_t n) const {
  n = std::min(n, letters_.size());
  return Word(std::vector<Letter>(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(n)));
}

std::string Word::to_string() const {
  const bool small = std::all_of(letters_.begin(), letters_.end(), [](Letter l) { return l < 10; });
  std::string out;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (!small && i > 0) out += ',';
    out += std::to_string(static_cast<unsigned>(letters_[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------

AffineIFS::AffineIFS(std::vector<AffineMap> maps, std::string name, double rank_tolerance)
    : name_(std::move(name)), maps_(std::move(maps)), rank_tolerance_(rank_tolerance) {
  if (maps_.empty()) {
    throw PreconditionError("geometry", "EmptySystem", "an IFS needs at least one map");
  }
  if (maps_.size() > 256) {
    throw PreconditionError("geometry", "AlphabetTooLarge", "at most 256 maps are supported");
  }
  for (const auto& m : maps_) {
    const Mat2& a = m.linear;
    if (!std::isfinite(a.a) || !std::isfinite(a.b) || !std::isfinite(a.c) || !std::isfinite(a.d) ||
        !std::isfinite(m.translation.x) || !std::isfinite(m.translation.y)) {
      throw PreconditionError("geometry", "NonFinite", "matrix and translation entries must be finite");
    }
    ranks_.push_back(m.exact ? m.exact->rank() : rank(a, rank_tolerance_));
    norms_.push_back(op_norm(a));
  }
}

AffineIFS AffineIFS::from_matrices(const std::vector<Mat2>& matrices, std::string name) {
  std::vector<AffineMap> maps;
  maps.reserve(matrices.size());
  for (const auto& m : matrices) maps.push_back({m, {}, std::nullopt});
  return AffineIFS(std::move(maps), std::move(name));
}

std::vector<Mat2> AffineIFS::matrices() const {
  std::vector<Mat2> out;
  out.reserve(maps_.size());
  for (const auto& m : maps_) out.push_back(m.linear);
  return out;
}

namespace {

std::vector<Letter> letters_with_rank(const std::vector<int>& ranks, int r) {
  std::vector<Letter> out;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] == r) out.push_back(static_cast<Letter>(i));
  }
  return out;
}

}  // namespace

std::vector<Letter> AffineIFS::invertible_letters() const { return letters_with_rank(ranks_, 2); }
std::vector<Letter> AffineIFS::rank_one_letters() const { return letters_with_rank(ranks_, 1); }
std::vector<Letter> AffineIFS::zero_letters() const { return letters_with_rank(ranks_, 0); }

bool AffineIFS::is_exact() const {
  return std::all_of(maps_.begin(), maps_.end(), [](const AffineMap& m) { return m.exact.has_value(); });
}

double AffineIFS::max_norm() const { return *std::max_element(norms_.begin(), norms_.end()); }

double AffineIFS::ball_radius() const {
  const double contraction = max_norm();
  if (!(contraction < 1.0)) {
    throw PreconditionError("geometry", "NotContractive", "ball radius needs max ||A_i|| < 1");
  }
  double largest = 0.0;
  for (const auto& m : maps_) largest = std::max(largest, m.translation.norm());
  return largest / (1.0 - contraction);
}

bool AffineIFS::has_common_fixed_point(double tol) const {
  std::optional<Vec2> common;
  for (const auto& m : maps_) {
    const Mat2 shifted = Mat2::identity() - m.linear;
    const double det = shifted.det();
    if (std::abs(det) <= tol) return false;
    const Vec2 fixed{(shifted.d * m.translation.x - shifted.b * m.translation.y) / det,
                     (-shifted.c * m.translation.x + shifted.a * m.translation.y) / det};
    if (!common) {
      common = fixed;
    } else if ((fixed - *common).norm() > tol * std::max(1.0, common->norm())) {
      return false;
    }
  }
  return true;
}

AffineIFS AffineIFS::with_translations(const std::vector<Vec2>& translations) const {
  if (translations.size() != maps_.size()) {
    throw PreconditionError("geometry", "SizeMismatch", "one translation per map is required");
  }
  auto maps = maps_;
  for (std::size_t i = 0; i < maps.size(); ++i) maps[i].translation = translations[i];
  return AffineIFS(std::move(maps), name_, rank_tolerance_);
}

AffineIFS AffineIFS::restricted_to(std::span<const Letter> letters) const {
  std::vector<AffineMap> maps;
  for (Letter l : letters) maps.push_back(maps_.at(l));
  return AffineIFS(std::move(maps), name_, rank_tolerance_);
}

AffineIFS AffineIFS::scaled(double factor) const {
  auto maps = maps_;
  for (auto& m : maps) {
    m.linear = m.linear * factor;
    m.exact.reset();
  }
  return AffineIFS(std::move(maps), name_, rank_tolerance_);
}

// ---------------------------------------------------------------------------

std::uint64_t default_node_budget() {
  constexpr std::uint64_t kDefault = 50'000'000;
  if (const char* env = std::getenv("AFFTHERMO_BUDGET")) {
    std::string_view text(env);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc{} && ptr == text.data() + text.size() && value >= 1.0) {
      return static_cast<std::uint64_t>(value);
    }
  }
  return kDefault;
}

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_worker_threads(unsigned n) { g_threads = std::max(1u, n); }
unsigned worker_threads() { return g_threads; }

void run_sharded(std::size_t count, const std::function<void(std::size_t)>& task) {
  const std::size_t threads = std::min<std::size_t>(worker_threads(), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace affthermo
