#include "ngs/backsearch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace ngs {

void MbsConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("MbsConfig: lambda must be in [0, 1]");
  if (steps < 1) throw std::invalid_argument("MbsConfig: steps must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("MbsConfig: beta must be > 0");
}

namespace {

std::optional<Symbol> leaf_target(const Expected& e) {
  if (const auto* s = std::get_if<Symbol>(&e)) return *s;
  if (const auto* v = std::get_if<Value>(&e)) {
    if (v->is_integer() && v->num() >= 0 && v->num() <= 9) return digit_symbol(static_cast<int>(v->num()));
  }
  return std::nullopt;
}

double subtree_prob(const ReasoningTree& rt, int node, const ProbMatrix& pm) {
  const ParseNode& n = rt.tree.node(node);
  double p = 1.0;
  for (int i = n.begin; i < n.end; ++i) p *= pm(i, rt.tree.node(rt.tree.leaf_at[static_cast<std::size_t>(i)]).terminal);
  return p;
}

// Child values that satisfy `lhs op rhs == target` with the other side fixed.
std::optional<Value> solve_left(Symbol op, const Value& target, const Value& rhs) {
  switch (op) {
    case Symbol::Plus: return target - rhs;
    case Symbol::Minus: return target + rhs;
    case Symbol::Times: return checked_divide(target, rhs);
    case Symbol::Divide: return target * rhs;
    default: return std::nullopt;
  }
}

std::optional<Value> solve_right(Symbol op, const Value& lhs, const Value& target) {
  switch (op) {
    case Symbol::Plus: return target - lhs;
    case Symbol::Minus: return lhs - target;
    case Symbol::Times: return checked_divide(target, lhs);
    case Symbol::Divide: {
      // lhs / rhs == target needs rhs = lhs / target with rhs != 0.
      if (lhs.is_zero()) return std::nullopt;
      return checked_divide(lhs, target);
    }
    default: return std::nullopt;
  }
}

}  // namespace

double priority(const ReasoningTree& rt, int node, const Expected& expected, const ProbMatrix& pm) {
  const ParseNode& n = rt.tree.node(node);
  const double p_node = subtree_prob(rt, node, pm);
  if (!n.is_leaf()) return (1.0 - p_node) / p_node;
  const auto target = leaf_target(expected);
  if (!target) throw std::invalid_argument("priority: leaf target outside the alphabet");
  return pm(n.begin, *target) / p_node;
}

std::vector<Correction> solve(const ReasoningTree& rt, int child, const Expected& parent_expected,
                              const Value& y, const ProbMatrix& pm, const CnfGrammar& g) {
  std::vector<Correction> out;
  const ParseNode& c = rt.tree.node(child);
  const ParseNode& parent = rt.tree.node(c.parent);

  if (c.is_leaf() && is_operator(c.terminal)) {
    SymbolString z = rt.string();
    for (Symbol op : kOperators) {
      if (op == c.terminal) continue;
      z[static_cast<std::size_t>(c.begin)] = op;
      const auto v = execute(g, z);
      if (v && *v == y) out.push_back({child, op, priority(rt, child, op, pm)});
    }
    return out;
  }

  Expected expected;
  if (const auto* target = std::get_if<Value>(&parent_expected)) {
    if (parent.children.size() == 1) {
      expected = *target;
    } else if (parent.children.size() == 3) {
      const Symbol op = rt.tree.node(parent.children[1]).terminal;
      std::optional<Value> solved;
      if (child == parent.children[0]) solved = solve_left(op, *target, rt.value(parent.children[2]));
      else solved = solve_right(op, rt.value(parent.children[0]), *target);
      if (solved) expected = *solved;
    }
  }

  if (c.is_leaf()) {
    const auto digit = leaf_target(expected);
    if (!std::holds_alternative<Value>(expected) || !digit || *digit == c.terminal) return out;
    out.push_back({child, *digit, priority(rt, child, *digit, pm)});
    return out;
  }
  // Unconstrained subtrees are only worth visiting for their operators.
  if (std::holds_alternative<std::monostate>(expected) && c.end - c.begin < 2) return out;
  out.push_back({child, expected, priority(rt, child, expected, pm)});
  return out;
}

std::optional<SymbolString> one_step_backsearch(const ReasoningTree& rt, const Value& y,
                                                const ProbMatrix& pm, const CnfGrammar& g) {
  if (rt.result() == y) throw std::invalid_argument("one_step_backsearch: formula already yields y");
  struct Entry {
    Correction correction;
    long order;
  };
  auto lower = [](const Entry& a, const Entry& b) {
    if (a.correction.priority != b.correction.priority) return a.correction.priority < b.correction.priority;
    return a.order > b.order;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> queue(lower);
  long order = 0;
  queue.push({{rt.tree.root, y, 1.0}, order++});
  while (!queue.empty()) {
    const Correction top = queue.top().correction;
    queue.pop();
    const ParseNode& n = rt.tree.node(top.node);
    if (n.is_leaf()) {
      SymbolString z = rt.string();
      z[static_cast<std::size_t>(n.begin)] = *leaf_target(top.expected);
      return z;
    }
    for (const int child : n.children) {
      for (Correction& c : solve(rt, child, top.expected, y, pm, g)) queue.push({std::move(c), order++});
    }
  }
  return std::nullopt;
}

namespace {

constexpr int category_size(Symbol s) { return is_digit(s) ? kNumDigits : kNumOperators; }

double poisson_pmf(int k, double beta) {
  return std::exp(static_cast<double>(k) * std::log(beta) - beta - std::lgamma(static_cast<double>(k) + 1.0));
}

double truncated_poisson(int d, int l, double beta) {
  double mass = 0.0;
  for (int k = 1; k <= l; ++k) mass += poisson_pmf(k, beta);
  return poisson_pmf(d, beta) / mass;
}

}  // namespace

SymbolString random_walk_proposal(std::span<const Symbol> z, double beta, Rng& rng) {
  const int l = static_cast<int>(z.size());
  std::poisson_distribution<int> poisson(beta);
  int d = 0;
  do {
    d = poisson(rng);
  } while (d < 1 || d > l);
  std::vector<int> positions(static_cast<std::size_t>(l));
  std::iota(positions.begin(), positions.end(), 0);
  // Partial Fisher-Yates: the first d entries are a uniform d-subset.
  for (int i = 0; i < d; ++i) {
    std::uniform_int_distribution<int> pick(i, l - 1);
    std::swap(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(pick(rng))]);
  }
  SymbolString out(z.begin(), z.end());
  for (int i = 0; i < d; ++i) {
    const auto pos = static_cast<std::size_t>(positions[static_cast<std::size_t>(i)]);
    const Symbol cur = out[pos];
    const int base = is_digit(cur) ? 0 : kNumDigits;
    const int offset = id(cur) - base;
    std::uniform_int_distribution<int> other(1, category_size(cur) - 1);
    out[pos] = static_cast<Symbol>(base + (offset + other(rng)) % category_size(cur));
  }
  return out;
}

double proposal_probability(std::span<const Symbol> from, std::span<const Symbol> to, double beta) {
  if (from.size() != to.size()) return 0.0;
  const int l = static_cast<int>(from.size());
  int d = 0;
  double per_symbol = 1.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i] == to[i]) continue;
    if (category(from[i]) != category(to[i])) return 0.0;
    ++d;
    per_symbol /= static_cast<double>(category_size(from[i]) - 1);
  }
  if (d == 0) return 0.0;
  // Number of d-subsets of l positions.
  double subsets = 1.0;
  for (int k = 0; k < d; ++k) subsets = subsets * static_cast<double>(l - k) / static_cast<double>(k + 1);
  return truncated_poisson(d, l, beta) / subsets * per_symbol;
}

SymbolString random_walk_step(std::span<const Symbol> z, const ProbMatrix& pm, double beta, Rng& rng,
                              bool* accepted) {
  SymbolString proposal = random_walk_proposal(z, beta, rng);
  const double log_ratio = pm.log_prob(proposal) - pm.log_prob(z);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const bool accept = log_ratio >= 0.0 || u <= std::exp(log_ratio);
  if (accepted) *accepted = accept;
  if (accept) return proposal;
  return SymbolString(z.begin(), z.end());
}

SymbolString multi_step_backsearch(std::span<const Symbol> z0, const Value& y, const ProbMatrix& pm,
                                   const MbsConfig& cfg, const CnfGrammar& g, Rng& rng,
                                   std::ostream* trace) {
  cfg.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SymbolString z(z0.begin(), z0.end());
  for (int t = 0; t < cfg.steps; ++t) {
    const char* kind = "rw";
    bool accepted = false;
    bool moved = false;
    if (unit(rng) < cfg.lambda) {
      const auto rt = reason(g, z);
      if (rt && rt->result() == y) {
        kind = "stay";
        accepted = true;
        moved = true;
      } else if (rt) {
        if (auto fix = one_step_backsearch(*rt, y, pm, g)) {
          z = std::move(*fix);
          kind = "1bs";
          accepted = true;
          moved = true;
        }
      }
    }
    if (!moved) z = random_walk_step(z, pm, cfg.beta, rng, &accepted);
    if (trace) {
      const auto v = execute(g, z);
      *trace << t << ',' << kind << ',' << to_string(z) << ',' << (accepted ? 1 : 0) << ','
             << (v && *v == y ? 1 : 0) << '\n';
    }
  }
  return z;
}

}  // namespace ngs
