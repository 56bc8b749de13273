#include "affthermo/symbolic.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace affthermo {

Word shift(const Word& word) {
  if (word.empty()) {
    throw PreconditionError("symbolic", "EmptyWord", "cannot shift the empty word");
  }
  const auto letters = word.letters();
  return Word(letters.subspan(1));
}

Mat2 word_product(const AffineIFS& ifs, const Word& word) {
  Mat2 product = Mat2::identity();
  for (Letter l : word.letters()) product = product * ifs.matrix(l);
  return product;
}

std::uint64_t full_tree_nodes(std::size_t letters, int n) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (int k = 1; k <= n; ++k) {
    if (letters != 0 && level > kMax / letters) return kMax;
    level *= letters;
    if (total > kMax - level) return kMax;
    total += level;
  }
  return total;
}

std::vector<Letter> alphabet_for(const AffineIFS& ifs, SubshiftKind kind) {
  if (kind == SubshiftKind::Invertible) return ifs.invertible_letters();
  std::vector<Letter> all(ifs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Letter>(i);
  return all;
}

LevelSet enumerate_level(const AffineIFS& ifs, SubshiftKind kind, int n, std::uint64_t node_budget) {
  if (n < 1) {
    throw PreconditionError("symbolic", "InvalidDepth", "enumerate_level needs n >= 1");
  }
  if (kind != SubshiftKind::Sigma) {
    const auto letters = alphabet_for(ifs, kind).size();
    if (full_tree_nodes(letters, n) > node_budget) {
      throw BudgetExceeded("symbolic", "enumerating " + std::to_string(letters) + "^" +
                                           std::to_string(n) + " words exceeds the node budget of " +
                                           std::to_string(node_budget));
    }
  }
  LevelSet level{kind, n, {}};
  NodeCounter counter(node_budget, "symbolic");
  WalkOptions options{kind, n, /*expand_zero_products=*/true};
  walk_tree(ifs, options, counter, [&](const TreeNode& node) {
    if (static_cast<int>(node.word.size()) == n) {
      level.entries.push_back({Word(node.word), node.product});
    }
    return true;
  });
  return level;
}

// ---------------------------------------------------------------------------

namespace {

/// Row line of a rank-one matrix: A = v w^T has row line span(w).
Direction row_line(const Mat2& m, double tol) { return Direction::of(rank_one_factor(m, tol).w); }

struct LineGraph {
  static constexpr int kDead = -1;
  // nullopt marks the full-rank state.
  std::vector<std::optional<Direction>> states;
  std::vector<std::vector<std::pair<Letter, int>>> edges;
  std::vector<bool> expanded;
  double merge_tol;

  int find_or_add(std::optional<Direction> state) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i].has_value() != state.has_value()) continue;
      if (!state || states[i]->approx_equal(*state, merge_tol)) return static_cast<int>(i);
    }
    states.push_back(state);
    edges.emplace_back();
    expanded.push_back(false);
    return static_cast<int>(states.size()) - 1;
  }
};

/// Successor of a state under a letter, or nullopt-of-optional for death.
struct Successor {
  bool dead = false;
  std::optional<Direction> state;
};

Successor step(const AffineIFS& ifs, const std::optional<Direction>& state, Letter letter) {
  const Mat2& m = ifs.matrix(letter);
  const int r = ifs.letter_rank(letter);
  if (r == 0) return {true, std::nullopt};
  if (!state) {
    if (r == 2) return {false, std::nullopt};
    return {false, row_line(m, ifs.rank_tolerance())};
  }
  const Vec2 image = m.transpose() * state->unit();
  if (image.norm() <= ifs.rank_tolerance() * ifs.letter_norm(letter)) return {true, std::nullopt};
  return {false, Direction::of(image)};
}

}  // namespace

NonzeroWordResult has_infinite_nonzero_word(const AffineIFS& ifs, int max_depth,
                                            const AutomatonConfig& config) {
  if (max_depth < 1) {
    throw PreconditionError("symbolic", "InvalidDepth", "has_infinite_nonzero_word needs maxDepth >= 1");
  }
  // An invertible letter repeated forever never reaches zero.
  if (const auto inv = ifs.invertible_letters(); !inv.empty()) {
    NonzeroWordResult r;
    r.status = NonzeroWordResult::Status::Yes;
    r.witness = Word{inv.front()};
    r.depth = 1;
    return r;
  }
  LineGraph graph{{}, {}, {}, config.line_tolerance};
  graph.find_or_add(std::nullopt);

  std::vector<int> frontier{0};
  int depth = 0;
  bool capped = false;
  while (!frontier.empty() && depth < max_depth && !capped) {
    std::vector<int> next;
    for (int s : frontier) {
      for (std::size_t l = 0; l < ifs.size(); ++l) {
        const auto succ = step(ifs, graph.states[s], static_cast<Letter>(l));
        if (succ.dead) continue;
        const auto before = graph.states.size();
        const int t = graph.find_or_add(succ.state);
        graph.edges[s].emplace_back(static_cast<Letter>(l), t);
        if (graph.states.size() > before) next.push_back(t);
      }
      graph.expanded[s] = true;
      if (graph.states.size() > config.max_states) {
        capped = true;
        break;
      }
    }
    frontier = std::move(next);
    ++depth;
  }
  const bool closed = std::all_of(graph.expanded.begin(), graph.expanded.end(), [](bool e) { return e; });

  // Iterative DFS looking for a cycle reachable from the start state.
  const std::size_t n = graph.states.size();
  enum Color : std::uint8_t { White, Grey, Black };
  std::vector<Color> color(n, White);
  std::vector<int> longest(n, 0);
  struct Frame {
    int state;
    std::size_t next_edge;
    Letter via;
  };
  std::vector<Frame> stack{{0, 0, 0}};
  color[0] = Grey;
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& out = graph.edges[top.state];
    if (top.next_edge < out.size()) {
      const auto [letter, target] = out[top.next_edge++];
      if (color[target] == Grey) {
        NonzeroWordResult result;
        result.status = NonzeroWordResult::Status::Yes;
        std::vector<Letter> letters;
        for (std::size_t i = 1; i < stack.size(); ++i) letters.push_back(stack[i].via);
        letters.push_back(letter);
        std::size_t entry = 0;
        while (stack[entry].state != target) ++entry;
        result.cycle_start = entry;
        result.witness = Word(std::move(letters));
        result.depth = depth;
        return result;
      }
      if (color[target] == White) {
        color[target] = Grey;
        stack.push_back({target, 0, letter});
      }
    } else {
      int best = 0;
      for (const auto& [letter, target] : out) best = std::max(best, longest[target] + 1);
      longest[top.state] = best;
      color[top.state] = Black;
      stack.pop_back();
    }
  }

  NonzeroWordResult result;
  if (closed) {
    result.status = NonzeroWordResult::Status::No;
    result.depth = longest[0] + 1;
  } else {
    result.status = NonzeroWordResult::Status::Inconclusive;
    result.depth = depth;
  }
  return result;
}

ZeroProductResult find_zero_product(const AffineIFS& ifs, int max_depth, const AutomatonConfig& config) {
  if (const auto zeros = ifs.zero_letters(); !zeros.empty()) {
    return {ZeroProductResult::Status::Found, Word{zeros.front()}};
  }
  const auto rank_one = ifs.rank_one_letters();
  if (rank_one.empty()) return {ZeroProductResult::Status::None, {}};

  // A shortest zero product starts and ends with rank-one letters, so it is
  // enough to follow row lines of products that start with one.
  LineGraph graph{{}, {}, {}, config.line_tolerance};
  std::vector<Word> words;
  std::vector<int> frontier;
  for (Letter j : rank_one) {
    const auto before = graph.states.size();
    const int s = graph.find_or_add(row_line(ifs.matrix(j), ifs.rank_tolerance()));
    if (graph.states.size() > before) {
      words.push_back(Word{j});
      frontier.push_back(s);
    }
  }
  int length = 1;
  while (!frontier.empty() && length < max_depth) {
    std::vector<int> next;
    for (int s : frontier) {
      for (std::size_t l = 0; l < ifs.size(); ++l) {
        const auto succ = step(ifs, graph.states[s], static_cast<Letter>(l));
        if (succ.dead) {
          Word w = words[s];
          w.push_back(static_cast<Letter>(l));
          return {ZeroProductResult::Status::Found, std::move(w)};
        }
        const auto before = graph.states.size();
        const int t = graph.find_or_add(succ.state);
        if (graph.states.size() > before) {
          Word w = words[s];
          w.push_back(static_cast<Letter>(l));
          words.push_back(std::move(w));
          next.push_back(t);
        }
      }
      if (graph.states.size() > config.max_states) {
        return {ZeroProductResult::Status::Inconclusive, {}};
      }
    }
    frontier = std::move(next);
    ++length;
  }
  if (frontier.empty()) return {ZeroProductResult::Status::None, {}};
  return {ZeroProductResult::Status::Inconclusive, {}};
}

SigmaLiveness::SigmaLiveness(const AffineIFS& ifs, const AutomatonConfig& /*config*/)
    : live_(ifs.size(), false) {
  const std::size_t m = ifs.size();
  if (ifs.contains_invertible()) {
    for (std::size_t i = 0; i < m; ++i) live_[i] = ifs.letter_rank(i) > 0;
    return;
  }
  // Only rank <= 1 letters: the row line of a product is that of its last
  // letter, so "j can be followed by k" is the whole automaton.
  const double tol = ifs.rank_tolerance();
  std::vector<std::vector<bool>> follows(m, std::vector<bool>(m, false));
  for (std::size_t j = 0; j < m; ++j) {
    live_[j] = ifs.letter_rank(j) == 1;
    for (std::size_t k = 0; k < m; ++k) {
      if (ifs.letter_rank(j) != 1 || ifs.letter_rank(k) != 1) continue;
      const Mat2 prod = ifs.matrix(j) * ifs.matrix(k);
      follows[j][k] = op_norm(prod) > tol * ifs.letter_norm(j) * ifs.letter_norm(k);
    }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (!live_[j]) continue;
      bool any = false;
      for (std::size_t k = 0; k < m && !any; ++k) any = follows[j][k] && live_[k];
      if (!any) {
        live_[j] = false;
        changed = true;
      }
    }
  }
}

bool SigmaLiveness::extends(const Word& nonzero_word) const {
  if (nonzero_word.empty()) {
    return std::any_of(live_.begin(), live_.end(), [](bool b) { return b; });
  }
  return live_[nonzero_word[nonzero_word.size() - 1]];
}

}  // namespace affthermo
