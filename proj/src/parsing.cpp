#include "ngs/parsing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ngs {

ProbMatrix::ProbMatrix(std::vector<SymbolRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw std::invalid_argument("ProbMatrix: no rows");
  for (const SymbolRow& row : rows_) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw std::invalid_argument("ProbMatrix: negative or NaN entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) throw std::invalid_argument("ProbMatrix: row does not sum to 1");
  }
}

ProbMatrix ProbMatrix::uniform(int length) {
  SymbolRow row;
  row.fill(1.0 / kNumSymbols);
  return ProbMatrix(std::vector<SymbolRow>(static_cast<std::size_t>(length), row));
}

ProbMatrix ProbMatrix::one_hot(std::span<const Symbol> z) {
  std::vector<SymbolRow> rows(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    rows[i].fill(0.0);
    rows[i][static_cast<std::size_t>(id(z[i]))] = 1.0;
  }
  return ProbMatrix(std::move(rows));
}

double ProbMatrix::log_prob(std::span<const Symbol> z) const {
  if (static_cast<int>(z.size()) != length()) throw std::invalid_argument("log_prob: length mismatch");
  double total = 0.0;
  for (int i = 0; i < length(); ++i) total += std::log((*this)(i, z[static_cast<std::size_t>(i)]));
  return total;
}

double ProbMatrix::span_prob(std::span<const Symbol> z, int begin, int end) const {
  double p = 1.0;
  for (int i = begin; i < end; ++i) p *= (*this)(i, z[static_cast<std::size_t>(i)]);
  return p;
}

SymbolString ParseTree::leaves() const {
  SymbolString out;
  out.reserve(leaf_at.size());
  for (int leaf : leaf_at) out.push_back(node(leaf).terminal);
  return out;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Entry {
  double score = kNegInf;
  int rule = -1;
  int split = -1;
};

class Chart {
 public:
  Chart(const CnfGrammar& g, std::span<const SymbolRow> log_weights)
      : g_(g), n_(log_weights.size()), nts_(static_cast<std::size_t>(g.num_nonterminals())),
        cells_((n_ + 1) * (n_ + 1) * nts_) {
    fill(log_weights);
  }

  const Entry& at(std::size_t i, std::size_t j, int a) const {
    return cells_[(i * (n_ + 1) + j) * nts_ + static_cast<std::size_t>(a)];
  }

  const Entry& root() const { return at(0, n_, g_.start()); }

  ParseTree backtrace() const {
    ParseTree tree;
    tree.leaf_at.assign(n_, -1);
    tree.root = build(tree, 0, n_, g_.start(), -1);
    return tree;
  }

 private:
  Entry& at(std::size_t i, std::size_t j, int a) {
    return cells_[(i * (n_ + 1) + j) * nts_ + static_cast<std::size_t>(a)];
  }

  void fill(std::span<const SymbolRow> lw) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (int s = 0; s < kNumSymbols; ++s) {
        const double w = lw[i][static_cast<std::size_t>(s)];
        if (w == kNegInf) continue;
        for (const int ri : g_.lexical_rules(static_cast<Symbol>(s))) {
          Entry& e = at(i, i + 1, g_.rules()[static_cast<std::size_t>(ri)].lhs);
          if (w > e.score) e = {w, ri, -1};
        }
      }
    }
    for (std::size_t span = 2; span <= n_; ++span) {
      for (std::size_t i = 0; i + span <= n_; ++i) {
        const std::size_t j = i + span;
        for (const int ri : g_.binary_rules()) {
          const CnfRule& r = g_.rules()[static_cast<std::size_t>(ri)];
          Entry& out = at(i, j, r.lhs);
          for (std::size_t k = i + 1; k < j; ++k) {
            const double left = at(i, k, r.left).score;
            if (left == kNegInf) continue;
            const double right = at(k, j, r.right).score;
            if (right == kNegInf) continue;
            const double score = left + right;
            if (score > out.score) out = {score, ri, static_cast<int>(k)};
          }
        }
      }
    }
  }

  int add_node(ParseTree& tree, ParseNode node, int parent) const {
    node.parent = parent;
    tree.nodes.push_back(std::move(node));
    const int index = static_cast<int>(tree.nodes.size() - 1);
    if (parent >= 0) tree.nodes[static_cast<std::size_t>(parent)].children.push_back(index);
    return index;
  }

  int add_leaf(ParseTree& tree, std::size_t pos, Symbol s, int parent) const {
    ParseNode leaf;
    leaf.terminal = s;
    leaf.begin = static_cast<int>(pos);
    leaf.end = static_cast<int>(pos + 1);
    const int index = add_node(tree, std::move(leaf), parent);
    tree.leaf_at[pos] = index;
    return index;
  }

  // Builds the source-grammar subtree for nonterminal `a` over [i, j).
  int build(ParseTree& tree, std::size_t i, std::size_t j, int a, int parent) const {
    const Entry& e = at(i, j, a);
    const CnfRule& r = g_.rules()[static_cast<std::size_t>(e.rule)];
    int top = -1;
    int attach = parent;
    for (const int unit : r.unit_chain) {
      ParseNode chain;
      chain.rule = unit;
      chain.begin = static_cast<int>(i);
      chain.end = static_cast<int>(j);
      attach = add_node(tree, std::move(chain), attach);
      if (top < 0) top = attach;
    }
    ParseNode core;
    core.rule = r.source_rule;
    core.begin = static_cast<int>(i);
    core.end = static_cast<int>(j);
    const int core_index = add_node(tree, std::move(core), attach);
    if (top < 0) top = core_index;
    if (r.lexical) {
      add_leaf(tree, i, r.terminal, core_index);
    } else {
      const auto k = static_cast<std::size_t>(e.split);
      flatten(tree, i, k, r.left, core_index);
      flatten(tree, k, j, r.right, core_index);
    }
    return top;
  }

  // Emits the source-level children hidden behind helper nonterminals.
  void flatten(ParseTree& tree, std::size_t i, std::size_t j, int a, int parent) const {
    const Entry& e = at(i, j, a);
    const CnfRule& r = g_.rules()[static_cast<std::size_t>(e.rule)];
    if (r.role == CnfRole::TerminalWrap) {
      add_leaf(tree, i, r.terminal, parent);
    } else if (r.role == CnfRole::Tail) {
      const auto k = static_cast<std::size_t>(e.split);
      flatten(tree, i, k, r.left, parent);
      flatten(tree, k, j, r.right, parent);
    } else {
      build(tree, i, j, a, parent);
    }
  }

  const CnfGrammar& g_;
  std::size_t n_;
  std::size_t nts_;
  std::vector<Entry> cells_;
};

}  // namespace

std::optional<ParseResult> viterbi_parse(const CnfGrammar& g, const ProbMatrix& pm) {
  std::vector<SymbolRow> lw(static_cast<std::size_t>(pm.length()));
  for (int i = 0; i < pm.length(); ++i) {
    for (int s = 0; s < kNumSymbols; ++s) {
      const double p = pm.row(i)[static_cast<std::size_t>(s)];
      lw[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = p > 0.0 ? std::log(p) : kNegInf;
    }
  }
  const Chart chart(g, lw);
  if (chart.root().score == kNegInf) return std::nullopt;
  ParseResult result;
  result.tree = chart.backtrace();
  result.string = result.tree.leaves();
  result.log_score = chart.root().score;
  return result;
}

std::optional<ParseTree> parse_string(const CnfGrammar& g, std::span<const Symbol> z) {
  if (z.empty()) return std::nullopt;
  std::vector<SymbolRow> lw(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    lw[i].fill(kNegInf);
    lw[i][static_cast<std::size_t>(id(z[i]))] = 0.0;
  }
  const Chart chart(g, lw);
  if (chart.root().score == kNegInf) return std::nullopt;
  return chart.backtrace();
}

}  // namespace ngs
