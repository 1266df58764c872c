#include "ngs/cnf.hpp"

#include <array>
#include <deque>
#include <stdexcept>

namespace ngs {

CnfGrammar binarize(const Grammar& g) {
  CnfGrammar cnf(g);
  cnf.nonterminals_ = g.nonterminals();
  auto fresh = [&cnf](std::string name) {
    cnf.nonterminals_.push_back(std::move(name));
    return static_cast<int>(cnf.nonterminals_.size() - 1);
  };

  std::array<int, kNumSymbols> wrapper{};
  wrapper.fill(-1);
  auto wrap = [&](Symbol s) {
    int& nt = wrapper[static_cast<std::size_t>(id(s))];
    if (nt < 0) {
      nt = fresh(std::string("<") + glyph(s) + ">");
      CnfRule r;
      r.lhs = nt;
      r.lexical = true;
      r.terminal = s;
      r.role = CnfRole::TerminalWrap;
      cnf.rules_.push_back(r);
    }
    return nt;
  };
  auto as_nonterminal = [&](const GrammarItem& item) {
    return item.is_terminal() ? wrap(item.terminal) : item.nonterminal;
  };

  for (std::size_t ri = 0; ri < g.rules().size(); ++ri) {
    const Rule& src = g.rules()[ri];
    const int source = static_cast<int>(ri);
    if (src.is_unit()) continue;
    if (src.rhs.size() == 1) {
      CnfRule r;
      r.lhs = src.lhs;
      r.lexical = true;
      r.terminal = src.rhs[0].terminal;
      r.source_rule = source;
      cnf.rules_.push_back(r);
      continue;
    }
    std::vector<int> items;
    for (const GrammarItem& item : src.rhs) items.push_back(as_nonterminal(item));
    // A -> X1 H1, H1 -> X2 H2, ..., H(k-2) -> X(k-1) Xk
    int lhs = src.lhs;
    for (std::size_t i = 0; i + 2 < items.size(); ++i) {
      const int helper = fresh("<r" + std::to_string(ri) + "." + std::to_string(i + 1) + ">");
      CnfRule r;
      r.lhs = lhs;
      r.left = items[i];
      r.right = helper;
      r.role = i == 0 ? CnfRole::Head : CnfRole::Tail;
      r.source_rule = source;
      cnf.rules_.push_back(r);
      lhs = helper;
    }
    CnfRule last;
    last.lhs = lhs;
    last.left = items[items.size() - 2];
    last.right = items.back();
    last.role = items.size() == 2 ? CnfRole::Whole : CnfRole::Tail;
    last.source_rule = source;
    cnf.rules_.push_back(last);
  }

  // Collapse unit chains: A =>* B via unit rules gives A every non-unit rule
  // of B, tagged with the chain taken.
  const std::size_t base_rules = cnf.rules_.size();
  for (int a = 0; a < g.num_nonterminals(); ++a) {
    std::vector<std::vector<int>> chain_to(static_cast<std::size_t>(g.num_nonterminals()));
    std::vector<bool> seen(static_cast<std::size_t>(g.num_nonterminals()), false);
    seen[static_cast<std::size_t>(a)] = true;
    std::deque<int> frontier{a};
    std::vector<int> order;
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop_front();
      for (std::size_t ri = 0; ri < g.rules().size(); ++ri) {
        const Rule& r = g.rules()[ri];
        if (!r.is_unit() || r.lhs != cur) continue;
        const int next = r.rhs[0].nonterminal;
        if (seen[static_cast<std::size_t>(next)]) continue;
        seen[static_cast<std::size_t>(next)] = true;
        chain_to[static_cast<std::size_t>(next)] = chain_to[static_cast<std::size_t>(cur)];
        chain_to[static_cast<std::size_t>(next)].push_back(static_cast<int>(ri));
        order.push_back(next);
        frontier.push_back(next);
      }
    }
    for (const int b : order) {
      for (std::size_t i = 0; i < base_rules; ++i) {
        const CnfRule& r = cnf.rules_[i];
        if (r.lhs != b || r.role == CnfRole::Tail || r.role == CnfRole::TerminalWrap) continue;
        CnfRule copy = r;
        copy.lhs = a;
        copy.unit_chain = chain_to[static_cast<std::size_t>(b)];
        cnf.rules_.push_back(std::move(copy));
      }
    }
  }

  for (std::size_t i = 0; i < cnf.rules_.size(); ++i) {
    const CnfRule& r = cnf.rules_[i];
    if (r.lexical) cnf.lexical_[static_cast<std::size_t>(id(r.terminal))].push_back(static_cast<int>(i));
    else cnf.binary_.push_back(static_cast<int>(i));
  }
  return cnf;
}

bool accepts(const CnfGrammar& g, std::span<const Symbol> z) {
  if (z.empty()) throw std::invalid_argument("accepts: empty string");
  const std::size_t n = z.size();
  const auto nts = static_cast<std::size_t>(g.num_nonterminals());
  // chart[(i * (n + 1) + j) * nts + A]
  std::vector<char> chart((n + 1) * (n + 1) * nts, 0);
  auto cell = [&](std::size_t i, std::size_t j) { return chart.data() + (i * (n + 1) + j) * nts; };
  for (std::size_t i = 0; i < n; ++i) {
    for (const int ri : g.lexical_rules(z[i])) cell(i, i + 1)[g.rules()[static_cast<std::size_t>(ri)].lhs] = 1;
  }
  for (std::size_t span = 2; span <= n; ++span) {
    for (std::size_t i = 0; i + span <= n; ++i) {
      const std::size_t j = i + span;
      char* out = cell(i, j);
      for (std::size_t k = i + 1; k < j; ++k) {
        const char* left = cell(i, k);
        const char* right = cell(k, j);
        for (const int ri : g.binary_rules()) {
          const CnfRule& r = g.rules()[static_cast<std::size_t>(ri)];
          if (left[r.left] && right[r.right]) out[r.lhs] = 1;
        }
      }
    }
  }
  return cell(0, n)[g.start()] != 0;
}

}  // namespace ngs
