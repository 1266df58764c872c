#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "ngs/cnf.hpp"
#include "ngs/symbol.hpp"

namespace ngs {

using SymbolRow = std::array<double, kNumSymbols>;

/// Per-position symbol distribution: l rows of 14 probabilities.
class ProbMatrix {
 public:
  static constexpr double kRowTolerance = 1e-9;

  /// Throws std::invalid_argument if empty, any entry is negative, or a row
  /// does not sum to 1 within kRowTolerance.
  explicit ProbMatrix(std::vector<SymbolRow> rows);

  static ProbMatrix uniform(int length);
  /// Puts all mass on the given string.
  static ProbMatrix one_hot(std::span<const Symbol> z);

  int length() const { return static_cast<int>(rows_.size()); }
  const SymbolRow& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  double operator()(int i, Symbol s) const { return rows_[static_cast<std::size_t>(i)][static_cast<std::size_t>(id(s))]; }

  /// log prod_i pm[i][z_i]
  double log_prob(std::span<const Symbol> z) const;
  /// prod of the entries at positions [begin, end) of z.
  double span_prob(std::span<const Symbol> z, int begin, int end) const;

 private:
  std::vector<SymbolRow> rows_;
};

/// A parse tree in the shape of the source grammar, stored as a flat node
/// array. Internal nodes carry a source rule id; leaves carry a terminal.
struct ParseNode {
  int rule = -1;  // source grammar rule, -1 for leaves
  Symbol terminal = Symbol::D0;
  int begin = 0;
  int end = 0;
  int parent = -1;
  std::vector<int> children;

  bool is_leaf() const { return rule < 0; }
};

struct ParseTree {
  std::vector<ParseNode> nodes;
  int root = -1;
  /// leaf node index for each string position
  std::vector<int> leaf_at;

  const ParseNode& node(int i) const { return nodes[static_cast<std::size_t>(i)]; }
  int length() const { return static_cast<int>(leaf_at.size()); }
  /// Leaves read left to right.
  SymbolString leaves() const;
};

struct ParseResult {
  SymbolString string;
  ParseTree tree;
  double log_score = 0.0;
};

/// Max-product CYK: the most probable string of length pm.length() in L(G)
/// under prod_i pm[i][z_i]. nullopt means no string of that length exists.
/// Ties prefer the lowest symbol id, then the lowest rule id.
std::optional<ParseResult> viterbi_parse(const CnfGrammar& g, const ProbMatrix& pm);

/// Parse tree of a fixed string, or nullopt if z is not in L(G).
std::optional<ParseTree> parse_string(const CnfGrammar& g, std::span<const Symbol> z);

}  // namespace ngs
