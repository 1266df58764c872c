#include "ngs/grammar.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ngs {

const std::string_view kArithmeticGrammarText = R"(# Arithmetic formulas over single-digit numbers.
S -> Expression
Expression -> Term
Expression -> Expression + Term
Expression -> Expression - Term
Term -> Factor
Term -> Term * Factor
Term -> Term / Factor
Factor -> 0
Factor -> 1
Factor -> 2
Factor -> 3
Factor -> 4
Factor -> 5
Factor -> 6
Factor -> 7
Factor -> 8
Factor -> 9
)";

Grammar::Grammar(std::vector<std::string> nonterminals, std::vector<Rule> rules, int start)
    : nonterminals_(std::move(nonterminals)), rules_(std::move(rules)), start_(start) {
  const int n = num_nonterminals();
  if (start_ < 0 || start_ >= n) throw std::invalid_argument("grammar: start symbol not in V");
  for (const Rule& r : rules_) {
    if (r.lhs < 0 || r.lhs >= n) throw std::invalid_argument("grammar: rule lhs not in V");
    if (r.rhs.empty()) throw std::invalid_argument("grammar: empty productions are not supported");
    for (const GrammarItem& item : r.rhs) {
      if (!item.is_terminal() && (item.nonterminal < 0 || item.nonterminal >= n)) {
        throw std::invalid_argument("grammar: rhs nonterminal not in V");
      }
    }
  }
}

int Grammar::nonterminal_id(std::string_view name) const {
  const auto it = std::find(nonterminals_.begin(), nonterminals_.end(), name);
  if (it == nonterminals_.end()) throw std::out_of_range("unknown nonterminal " + std::string(name));
  return static_cast<int>(it - nonterminals_.begin());
}

std::string Grammar::rule_to_string(int rule) const {
  const Rule& r = rules_.at(static_cast<std::size_t>(rule));
  std::string out = nonterminals_[static_cast<std::size_t>(r.lhs)] + " ->";
  for (const GrammarItem& item : r.rhs) {
    out += ' ';
    if (item.is_terminal()) out += glyph(item.terminal);
    else out += nonterminals_[static_cast<std::size_t>(item.nonterminal)];
  }
  return out;
}

std::string Grammar::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    out += rule_to_string(static_cast<int>(i));
    out += '\n';
  }
  return out;
}

Grammar Grammar::from_text(std::string_view text) {
  std::vector<std::string> names;
  std::vector<Rule> rules;
  auto intern = [&names](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it != names.end()) return static_cast<int>(it - names.begin());
    names.push_back(name);
    return static_cast<int>(names.size() - 1);
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> parts;
    for (std::string tok; tokens >> tok;) parts.push_back(tok);
    if (parts.empty()) continue;
    if (parts.size() < 3 || parts[1] != "->") {
      throw std::invalid_argument("grammar line " + std::to_string(line_no) +
                                  ": expected `LHS -> RHS...`");
    }
    if (symbol_from_glyph(parts[0])) {
      throw std::invalid_argument("grammar line " + std::to_string(line_no) +
                                  ": terminal on the left side");
    }
    Rule rule{intern(parts[0]), {}};
    for (std::size_t i = 2; i < parts.size(); ++i) {
      if (const auto sym = symbol_from_glyph(parts[i])) rule.rhs.push_back(GrammarItem::term(*sym));
      else rule.rhs.push_back(GrammarItem::nt(intern(parts[i])));
    }
    rules.push_back(std::move(rule));
  }
  if (rules.empty()) throw std::invalid_argument("grammar: no productions");
  return Grammar(std::move(names), std::move(rules), 0);
}

Grammar load_arithmetic_grammar() { return Grammar::from_text(kArithmeticGrammarText); }

namespace {

using StringSet = std::vector<SymbolString>;

void sort_unique(StringSet& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

// Expands rhs[item..] into exactly `remaining` symbols appended to `prefix`.
void expand(const std::vector<GrammarItem>& rhs, std::size_t item, int remaining,
            const std::vector<std::vector<StringSet>>& table, SymbolString& prefix,
            StringSet& out) {
  if (item == rhs.size()) {
    if (remaining == 0) out.push_back(prefix);
    return;
  }
  const int items_left = static_cast<int>(rhs.size() - item);
  if (remaining < items_left) return;
  const GrammarItem& it = rhs[item];
  if (it.is_terminal()) {
    prefix.push_back(it.terminal);
    expand(rhs, item + 1, remaining - 1, table, prefix, out);
    prefix.pop_back();
    return;
  }
  const int max_len = remaining - (items_left - 1);
  for (int len = 1; len <= max_len; ++len) {
    for (const SymbolString& piece : table[static_cast<std::size_t>(it.nonterminal)][static_cast<std::size_t>(len)]) {
      prefix.insert(prefix.end(), piece.begin(), piece.end());
      expand(rhs, item + 1, remaining - len, table, prefix, out);
      prefix.resize(prefix.size() - piece.size());
    }
  }
}

}  // namespace

std::vector<SymbolString> enumerate_language(const Grammar& g, int length) {
  if (length < 1 || length > kMaxEnumerationLength) {
    throw std::invalid_argument("enumerate_language: length must be in [1, " +
                                std::to_string(kMaxEnumerationLength) + "]");
  }
  const auto nts = static_cast<std::size_t>(g.num_nonterminals());
  // table[A][n] = strings of length n derivable from A.
  std::vector<std::vector<StringSet>> table(nts, std::vector<StringSet>(static_cast<std::size_t>(length) + 1));
  SymbolString prefix;
  for (int n = 1; n <= length; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (const Rule& r : g.rules()) {
      if (r.is_unit()) continue;
      // Non-unit rules only reference strictly shorter pieces, already final.
      expand(r.rhs, 0, n, table, prefix, table[static_cast<std::size_t>(r.lhs)][un]);
    }
    for (auto& per_nt : table) sort_unique(per_nt[un]);
    // Unit rules propagate same-length sets until nothing changes.
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Rule& r : g.rules()) {
        if (!r.is_unit()) continue;
        const StringSet& from = table[static_cast<std::size_t>(r.rhs[0].nonterminal)][un];
        StringSet& to = table[static_cast<std::size_t>(r.lhs)][un];
        const std::size_t before = to.size();
        StringSet merged;
        merged.reserve(before + from.size());
        std::set_union(to.begin(), to.end(), from.begin(), from.end(), std::back_inserter(merged));
        if (merged.size() != before) {
          to = std::move(merged);
          changed = true;
        }
      }
    }
  }
  return std::move(table[static_cast<std::size_t>(g.start())][static_cast<std::size_t>(length)]);
}

}  // namespace ngs
