#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ngs/parsing.hpp"
#include "ngs/value.hpp"

namespace ngs {

/// A parse tree annotated bottom-up with exact values. Operator leaves hold no
/// value; every other node does.
struct ReasoningTree {
  ParseTree tree;
  std::vector<std::optional<Value>> values;

  const Value& value(int node) const { return *values[static_cast<std::size_t>(node)]; }
  Value result() const { return value(tree.root); }
  SymbolString string() const { return tree.leaves(); }
};

struct DivisionByZero {
  friend bool operator==(const DivisionByZero&, const DivisionByZero&) = default;
};

using Evaluation = std::variant<ReasoningTree, DivisionByZero>;

/// Unit rules copy their child's value; rules shaped `X op Y` apply the
/// operator exactly; digit leaves are their digit. Throws
/// std::invalid_argument for rule shapes without arithmetic meaning.
Evaluation evaluate(const ParseTree& t);

/// The root value.
inline Value result(const ReasoningTree& rt) { return rt.result(); }

/// f(z): parse then evaluate. nullopt when z is not in L(G) or divides by zero.
std::optional<Value> execute(const CnfGrammar& g, std::span<const Symbol> z);

/// Parse + evaluate, keeping the tree. nullopt as for execute().
std::optional<ReasoningTree> reason(const CnfGrammar& g, std::span<const Symbol> z);

}  // namespace ngs
