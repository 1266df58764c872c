#include "ngs/reasoning.hpp"

#include <stdexcept>

namespace ngs {

Evaluation evaluate(const ParseTree& t) {
  ReasoningTree rt{t, std::vector<std::optional<Value>>(t.nodes.size())};
  // Children always follow their parent in the node array.
  for (std::size_t k = t.nodes.size(); k-- > 0;) {
    const ParseNode& n = t.nodes[k];
    if (n.is_leaf()) {
      if (is_digit(n.terminal)) rt.values[k] = Value(digit_value(n.terminal));
      continue;
    }
    if (n.children.size() == 1) {
      const auto& child = rt.values[static_cast<std::size_t>(n.children[0])];
      if (!child) throw std::invalid_argument("evaluate: unit rule over an operator");
      rt.values[k] = child;
      continue;
    }
    if (n.children.size() == 3) {
      const ParseNode& op = t.node(n.children[1]);
      const auto& lhs = rt.values[static_cast<std::size_t>(n.children[0])];
      const auto& rhs = rt.values[static_cast<std::size_t>(n.children[2])];
      if (!op.is_leaf() || !is_operator(op.terminal) || !lhs || !rhs) {
        throw std::invalid_argument("evaluate: expected `X op Y`");
      }
      const auto v = apply_operator(op.terminal, *lhs, *rhs);
      if (!v) return DivisionByZero{};
      rt.values[k] = *v;
      continue;
    }
    throw std::invalid_argument("evaluate: unsupported rule shape");
  }
  return rt;
}

std::optional<ReasoningTree> reason(const CnfGrammar& g, std::span<const Symbol> z) {
  auto tree = parse_string(g, z);
  if (!tree) return std::nullopt;
  Evaluation e = evaluate(*tree);
  if (auto* rt = std::get_if<ReasoningTree>(&e)) return std::move(*rt);
  return std::nullopt;
}

std::optional<Value> execute(const CnfGrammar& g, std::span<const Symbol> z) {
  auto rt = reason(g, z);
  if (!rt) return std::nullopt;
  return rt->result();
}

}  // namespace ngs
