#pragma once

// Word spaces over the alphabet of an IFS: level sets of the full shift,
// the non-zero-product shift and the invertible shift, a shared depth-first
// product tree, and decisions about infinite non-zero words.

#include "affthermo/errors.hpp"
#include "affthermo/ifs.hpp"

#include <atomic>
#include <cstdint>
#include <vector>

namespace affthermo {

/// Drops the first letter. Throws PreconditionError("EmptyWord").
Word shift(const Word& word);

/// Product A_{w_1} ... A_{w_n}; identity for the empty word.
Mat2 word_product(const AffineIFS& ifs, const Word& word);

struct LevelEntry {
  Word word;
  Mat2 product;
};

/// The words of Gamma_n with their products, in lexicographic order.
struct LevelSet {
  SubshiftKind kind = SubshiftKind::Full;
  int depth = 0;
  std::vector<LevelEntry> entries;

  std::size_t size() const { return entries.size(); }
};

/// Enumerates Gamma_n. Sigma prunes a branch once its product is zero; Full
/// lists every word including zero products. Throws BudgetExceeded when the
/// tree would exceed `node_budget` nodes.
LevelSet enumerate_level(const AffineIFS& ifs, SubshiftKind kind, int n,
                         std::uint64_t node_budget = default_node_budget());

/// Number of tree nodes of depth 1..n for an m-letter alphabet, saturating.
std::uint64_t full_tree_nodes(std::size_t letters, int n);

// ---------------------------------------------------------------------------
// Shared depth-first product tree.

/// Thread-safe node counter enforcing an enumeration budget.
class NodeCounter {
 public:
  NodeCounter(std::uint64_t budget, const char* module) : budget_(budget), module_(module) {}

  void tick() {
    if (count_.fetch_add(1, std::memory_order_relaxed) + 1 > budget_) {
      throw BudgetExceeded(module_, "node budget of " + std::to_string(budget_) +
                                        " tree nodes exhausted");
    }
  }
  std::uint64_t count() const { return count_.load(); }
  std::uint64_t budget() const { return budget_; }

 private:
  std::atomic<std::uint64_t> count_{0};
  std::uint64_t budget_;
  const char* module_;
};

/// One node of the product tree, i.e. a word of length >= 1.
struct TreeNode {
  std::span<const Letter> word;
  const Mat2& product;
  double norm;     ///< alpha_1 of the product
  double abs_det;  ///< product of the letters' |det|, zero if any letter is singular
  bool zero;       ///< product is the zero matrix (Full kind only)
};

struct WalkOptions {
  SubshiftKind kind = SubshiftKind::Full;
  int max_depth = 1;
  /// Full kind: keep expanding below zero products instead of stopping there.
  bool expand_zero_products = false;
};

namespace detail {

struct WalkState {
  const AffineIFS& ifs;
  const WalkOptions& options;
  NodeCounter& counter;
  std::vector<Letter> alphabet;
  std::vector<Letter> word;
  std::vector<double> letter_abs_det;
};

template <class Visitor>
void walk_node(WalkState& st, const Mat2& parent, double parent_norm, double parent_det,
               bool parent_zero, Letter letter, Visitor& visit) {
  st.counter.tick();
  const double tol = st.ifs.rank_tolerance();
  const int letter_rank = st.ifs.letter_rank(letter);
  Mat2 product = parent * st.ifs.matrix(letter);
  double norm = 0.0;
  bool zero = parent_zero || letter_rank == 0;
  if (!zero) {
    norm = op_norm(product);
    zero = norm <= tol * parent_norm * st.ifs.letter_norm(letter);
  }
  if (zero) {
    if (st.options.kind != SubshiftKind::Full) return;
    product = Mat2::zero();
    norm = 0.0;
  }
  const double abs_det = zero ? 0.0 : parent_det * st.letter_abs_det[letter];

  st.word.push_back(letter);
  const TreeNode node{st.word, product, norm, abs_det, zero};
  const bool descend = visit(node);
  if (descend && static_cast<int>(st.word.size()) < st.options.max_depth &&
      (!zero || st.options.expand_zero_products)) {
    for (Letter next : st.alphabet) walk_node(st, product, norm, abs_det, zero, next, visit);
  }
  st.word.pop_back();
}

}  // namespace detail

/// Letters usable under the given kind (all letters, or the invertible ones).
std::vector<Letter> alphabet_for(const AffineIFS& ifs, SubshiftKind kind);

/// Depth-first walk of the subtree rooted at the one-letter word `root`.
/// The visitor receives every node of depth <= max_depth and returns whether
/// to descend below it. Sigma skips zero products entirely; Full reports a
/// zero product once and (by default) does not expand it.
template <class Visitor>
void walk_subtree(const AffineIFS& ifs, const WalkOptions& options, Letter root,
                  NodeCounter& counter, Visitor&& visit) {
  if (options.max_depth < 1) return;
  detail::WalkState st{ifs, options, counter, alphabet_for(ifs, options.kind), {}, {}};
  if (std::find(st.alphabet.begin(), st.alphabet.end(), root) == st.alphabet.end()) return;
  st.letter_abs_det.resize(ifs.size());
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    st.letter_abs_det[i] = ifs.letter_rank(i) == 2 ? std::abs(ifs.matrix(i).det()) : 0.0;
  }
  st.word.reserve(static_cast<std::size_t>(options.max_depth));
  detail::walk_node(st, Mat2::identity(), 1.0, 1.0, false, root, visit);
}

/// Walks every root in alphabet order.
template <class Visitor>
void walk_tree(const AffineIFS& ifs, const WalkOptions& options, NodeCounter& counter,
               Visitor&& visit) {
  for (Letter root : alphabet_for(ifs, options.kind)) {
    walk_subtree(ifs, options, root, counter, visit);
  }
}

// ---------------------------------------------------------------------------
// Infinite non-zero words.

/// Tolerances for the line-state automaton. States are "full rank" plus the
/// row line of a rank-one product (the line that decides whether right
/// multiplication annihilates it).
struct AutomatonConfig {
  double line_tolerance = 1e-9;
  std::size_t max_states = 4096;
};

struct NonzeroWordResult {
  enum class Status { Yes, No, Inconclusive };
  Status status = Status::Inconclusive;
  /// Yes: a prefix followed by one period; the word witness[0..cycle_start)
  /// followed by witness[cycle_start..] repeated forever has only non-zero
  /// prefix products.
  Word witness;
  std::size_t cycle_start = 0;
  /// No: every word of this length has zero product. Otherwise the depth
  /// explored.
  int depth = 0;
};

NonzeroWordResult has_infinite_nonzero_word(const AffineIFS& ifs, int max_depth,
                                            const AutomatonConfig& config = {});

struct ZeroProductResult {
  enum class Status { Found, None, Inconclusive };
  Status status = Status::Inconclusive;
  Word witness;  ///< a word with zero product when Found
};

/// Searches the semigroup generated by the letters for the zero matrix.
/// None is only reported when the search closes (every reachable state
/// explored).
ZeroProductResult find_zero_product(const AffineIFS& ifs, int max_depth,
                                    const AutomatonConfig& config = {});

/// Decides, per final letter, whether a non-zero word can be extended to an
/// infinite word of the non-zero shift. When the tuple has an invertible
/// letter every non-zero word extends; otherwise the answer only depends on
/// the row line of the final (rank-one) letter.
class SigmaLiveness {
 public:
  explicit SigmaLiveness(const AffineIFS& ifs, const AutomatonConfig& config = {});
  bool extends(const Word& nonzero_word) const;
  bool extends_after(Letter last) const { return live_[last]; }

 private:
  std::vector<bool> live_;
};

}  // namespace affthermo
