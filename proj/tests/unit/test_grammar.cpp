#include <algorithm>
#include <random>

#include "../oracles.hpp"
#include "doctest.h"
#include "ngs/cnf.hpp"
#include "ngs/grammar.hpp"

using namespace ngs;

TEST_CASE("the arithmetic grammar has four nonterminals and seventeen rules") {
  const Grammar g = load_arithmetic_grammar();
  CHECK(g.num_nonterminals() == 4);
  CHECK(g.rules().size() == 17);
  CHECK(g.nonterminals()[static_cast<std::size_t>(g.start())] == "S");
  CHECK(g.rule_to_string(2) == "Expression -> Expression + Term");
}

TEST_CASE("grammar text round trips") {
  const Grammar g = load_arithmetic_grammar();
  const Grammar h = Grammar::from_text(g.to_text());
  CHECK(h.to_text() == g.to_text());
  CHECK(h.rules().size() == g.rules().size());
}

TEST_CASE("malformed grammars are rejected") {
  CHECK_THROWS_AS(Grammar::from_text(""), std::invalid_argument);
  CHECK_THROWS_AS(Grammar::from_text("S ->"), std::invalid_argument);
  CHECK_THROWS_AS(Grammar::from_text("S => 1"), std::invalid_argument);
  CHECK_THROWS_AS(Grammar({"S"}, {Rule{0, {GrammarItem::nt(3)}}}, 0), std::invalid_argument);
}

TEST_CASE("language sizes match the digit/operator pattern count") {
  const Grammar g = load_arithmetic_grammar();
  CHECK(enumerate_language(g, 1).size() == 10);
  CHECK(enumerate_language(g, 2).empty());
  CHECK(enumerate_language(g, 3).size() == 400);
  CHECK(enumerate_language(g, 5).size() == 16000);
  CHECK_THROWS_AS(enumerate_language(g, 0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_language(g, 8), std::invalid_argument);
}

TEST_CASE("enumerated language equals the pattern oracle") {
  const Grammar g = load_arithmetic_grammar();
  for (int len : {1, 3, 5}) {
    CHECK(enumerate_language(g, len) == oracle::all_valid(len));
  }
}

TEST_CASE("CNF recognizes exactly the source language") {
  const Grammar g = load_arithmetic_grammar();
  const CnfGrammar cnf = binarize(g);
  for (const CnfRule& r : cnf.rules()) {
    if (r.lexical) {
      CHECK(r.left == -1);
    } else {
      CHECK(r.left >= 0);
      CHECK(r.right >= 0);
    }
  }
  for (int len = 1; len <= 4; ++len) {
    const auto lang = enumerate_language(g, len);
    for (const SymbolString& z : oracle::all_strings(len)) {
      const bool in = std::binary_search(lang.begin(), lang.end(), z);
      REQUIRE(accepts(cnf, z) == in);
    }
  }
  CHECK_THROWS_AS(accepts(cnf, SymbolString{}), std::invalid_argument);
}

TEST_CASE("CNF of a grammar with long rules and inner terminals") {
  const Grammar g = Grammar::from_text("A -> B + B * B\nA -> 1 - B\nA -> B\nB -> 3\nB -> 4\n");
  const CnfGrammar cnf = binarize(g);
  for (int len = 1; len <= 5; ++len) {
    const auto lang = enumerate_language(g, len);
    for (const SymbolString& z : oracle::all_strings(len)) {
      REQUIRE(accepts(cnf, z) == std::binary_search(lang.begin(), lang.end(), z));
    }
  }
  CHECK(enumerate_language(g, 5).size() == 8);
}
