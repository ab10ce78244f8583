#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "helpers.hpp"
#include "kidex/error.hpp"
#include "kidex/resources.hpp"
#include "kidex/ruledsl.hpp"
#include "oracles.hpp"

using namespace kidex;
using ruledsl::Pattern;

namespace {

std::string wrap_rule(const std::string& pattern, const std::string& action = "Annotate($0, K, \"v\")") {
  return "{ ruleType: \"tokens\", pattern: ( " + pattern + " ), action: ( " + action + " ) }\n";
}

/// Line and column of the RuleError thrown by parsing `src`.
std::pair<std::size_t, std::size_t> error_pos(const std::string& src) {
  try {
    ruledsl::parse_rules(src, "t.tre");
  } catch (const RuleError& e) {
    return {e.line(), e.column()};
  }
  return {0, 0};
}

const ruledsl::TokenPredicate& only_pred(const ruledsl::CompiledRules& c) {
  return c.stages.at(0).rules.at(0).predicates.at(0);
}

bool pred_accepts(const ruledsl::TokenPredicate& p, const std::string& word) {
  if (p.any) return true;
  for (const auto& t : p.word_tests) {
    if (!t(word)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("the ISIN rule parses to the expected tree") {
  const auto file = ruledsl::parse_rules(fixtures::kIsinRule, "isin.tre");
  REQUIRE(file.bindings.size() == 3);
  CHECK(file.bindings[0].name == "StartISIN");
  CHECK(file.bindings[1].name == "EndISIN");
  CHECK(file.bindings[2].name == "code");
  CHECK_FALSE(file.bindings[2].is_pattern);
  CHECK(file.bindings[2].is_regex_string());
  CHECK(file.bindings[2].regex_body() == "([A-Za-z][A-Za-z][0-9]{10})");
  CHECK(file.bindings[1].pattern.kind == Pattern::Kind::wildcard);
  CHECK(file.bindings[0].pattern.kind == Pattern::Kind::alt);
  CHECK(file.bindings[0].pattern.children.size() == 2);

  REQUIRE(file.rules.size() == 1);
  const ruledsl::Rule& r = file.rules[0];
  CHECK(r.rule_id == "isin.tre:9");
  CHECK(r.stage == 0);
  const Pattern& p = r.pattern;
  REQUIRE(p.kind == Pattern::Kind::seq);
  REQUIRE(p.children.size() == 3);
  CHECK(p.children[0].kind == Pattern::Kind::var_ref);
  CHECK(p.children[0].text == "StartISIN");
  CHECK(p.children[2].kind == Pattern::Kind::var_ref);
  CHECK(p.children[2].text == "EndISIN");
  const Pattern& g = p.children[1];
  REQUIRE(g.kind == Pattern::Kind::named_group);
  CHECK(g.text == "CodeISIN");
  const Pattern& q = g.children.at(0);
  REQUIRE(q.kind == Pattern::Kind::quantified);
  CHECK(q.quant == ruledsl::Quantifier{1, ruledsl::Quantifier::kUnbounded, true});
  const Pattern& set = q.children.at(0);
  REQUIRE(set.kind == Pattern::Kind::attr_set);
  REQUIRE(set.constraints.size() == 2);
  CHECK(set.constraints[0].key == "word");
  CHECK(set.constraints[0].value.kind == ruledsl::ConstraintValue::Kind::binding);
  CHECK(set.constraints[0].value.text == "code");
  CHECK(set.constraints[1].key == "SECTION");
  CHECK(set.constraints[1].value.kind == ruledsl::ConstraintValue::Kind::literal);
  CHECK(set.constraints[1].value.text == "SECTION_PRODUCT");

  REQUIRE(r.actions.size() == 1);
  CHECK(r.actions[0].group == "CodeISIN");
  CHECK(r.actions[0].key == "ISIN");
  CHECK(r.actions[0].value == "ISIN");
  CHECK_FALSE(r.actions[0].captured_text);
}

TEST_CASE("a pattern binding holds a sequence") {
  const auto file = ruledsl::parse_rules("$X = (/a/ /b/)\n");
  REQUIRE(file.bindings.size() == 1);
  const Pattern& p = file.bindings[0].pattern;
  REQUIRE(p.kind == Pattern::Kind::seq);
  REQUIRE(p.children.size() == 2);
  CHECK(p.children[0].kind == Pattern::Kind::token_regex);
  CHECK(p.children[0].text == "a");
  CHECK(p.children[1].text == "b");
}

TEST_CASE("undefined bindings are reported with their position") {
  const std::string src = "// header\n" + wrap_rule("/a/ $Undefined");
  CHECK_THROWS_WITH_AS(ruledsl::parse_rules(src, "t.tre"), doctest::Contains("$Undefined"), RuleError);
  const auto [line, col] = error_pos(src);
  CHECK(line == 2);
  CHECK(col == src.substr(src.find('\n') + 1).find("$Undefined") + 1);
}

TEST_CASE("rule file errors") {
  CHECK_THROWS_WITH_AS(ruledsl::parse_rules("$A = (/a/)\n$A = (/b/)\n"), doctest::Contains("duplicate"), RuleError);
  CHECK_THROWS_WITH_AS(ruledsl::parse_rules("{ ruleType: \"text\", pattern: ( /a/ ), action: ( Annotate($0, K, \"v\") ) }"),
                       doctest::Contains("tokens"), RuleError);
  CHECK_THROWS_WITH_AS(ruledsl::parse_rules(wrap_rule("/a/", "Annotate($G, K, \"v\")")),
                       doctest::Contains("$G"), RuleError);
  CHECK_THROWS_AS(ruledsl::parse_rules(wrap_rule("/a/{3,1}")), RuleError);
  CHECK_THROWS_AS(ruledsl::parse_rules(wrap_rule("/a/", "")), RuleError);
  CHECK_THROWS_AS(ruledsl::parse_rules(wrap_rule("/a/ )")), RuleError);
  CHECK_THROWS_AS(ruledsl::parse_rules("$s = \"x\"\n" + wrap_rule("$s")), RuleError);
  CHECK_THROWS_AS(ruledsl::parse_rules("$p = (/x/)\n" + wrap_rule("[{word:$p}]")), RuleError);
  // A binding may only be used after its definition.
  CHECK_THROWS_AS(ruledsl::parse_rules(wrap_rule("$Later") + "$Later = (/a/)\n"), RuleError);

  const auto [line, col] = error_pos("$A = (/a/\n   |)\n$B = ( /b/ ]\n");
  CHECK(line == 3);
  CHECK(col == 12);
}

TEST_CASE("syntax errors list the expected tokens") {
  CHECK_THROWS_WITH_AS(ruledsl::parse_rules("{ ruleType \"tokens\" }"), doctest::Contains("expected ':'"), RuleError);
}

TEST_CASE("stages, ids and multiple actions") {
  const std::string src = "$A = (/a/)\n" + wrap_rule("(?$G $A) /b/", "Annotate($G, K, CAPTURED_TEXT), Annotate($0, L, \"x\")") +
                          "{ ruleType: \"tokens\", pattern: ( /c/ ), action: ( Annotate($0, M, \"m\") ), stage: 2 }\n";
  const auto file = ruledsl::parse_rules(src, "s.tre");
  REQUIRE(file.rules.size() == 2);
  CHECK(file.rules[0].rule_id == "s.tre:2");
  CHECK(file.rules[0].actions.size() == 2);
  CHECK(file.rules[0].actions[0].captured_text);
  CHECK(file.rules[0].actions[1].whole_match());
  CHECK(file.rules[1].stage == 2);

  const auto compiled = ruledsl::compile(file, "s.tre");
  REQUIRE(compiled.stages.size() == 2);
  CHECK(compiled.stages[0].stage == 0);
  CHECK(compiled.stages[1].stage == 2);
  CHECK(compiled.stages[0].rules[0].slot_of("G") >= 0);
  CHECK(compiled.stages[0].rules[0].slot_of("nope") < 0);
}

TEST_CASE("token regexes are anchored to the whole token") {
  const auto c = ruledsl::compile(ruledsl::parse_rules(wrap_rule("/Prodotto|prodotto/")));
  const auto& p = only_pred(c);
  CHECK(pred_accepts(p, "Prodotto"));
  CHECK(pred_accepts(p, "prodotto"));
  CHECK_FALSE(pred_accepts(p, "prodotti"));
  CHECK_FALSE(pred_accepts(p, "Prodotto:"));
}

TEST_CASE("wildcard accepts every token") {
  const auto c = ruledsl::compile(ruledsl::parse_rules(wrap_rule("/*/")));
  const auto& p = only_pred(c);
  CHECK(p.any);
  CHECK(pred_accepts(p, "anything"));
}

TEST_CASE("attribute sets are conjunctions") {
  const auto c = ruledsl::compile(ruledsl::parse_rules(
      "$code = \"/([A-Za-z][A-Za-z][0-9]{10})/\"\n" + wrap_rule("[{word:$code} & {SECTION:\"SECTION_PRODUCT\"}]")));
  const auto& p = only_pred(c);
  CHECK_FALSE(p.any);
  REQUIRE(p.word_tests.size() == 1);
  REQUIRE(p.annotation_tests.size() == 1);
  CHECK(p.word_tests[0]("CH0524993752"));
  CHECK_FALSE(p.word_tests[0]("CH052499375"));
  CHECK(p.annotation_tests[0].first == "SECTION");
  CHECK(p.annotation_tests[0].second("SECTION_PRODUCT"));
  CHECK_FALSE(p.annotation_tests[0].second("SECTION_RISK"));
}

TEST_CASE("string escapes keep regex backslashes") {
  const auto file = ruledsl::parse_rules("$s = \"/\\+?[0-9]+/\"\n$t = \"a\\\"b\\\\c\"\n");
  CHECK(file.bindings[0].regex_body() == "\\+?[0-9]+");
  CHECK(file.bindings[1].value == "a\"b\\c");
}

TEST_CASE("invalid character regexes fail at compile time") {
  const auto file = ruledsl::parse_rules("\n" + wrap_rule("/a(/"), "bad.tre");
  try {
    ruledsl::compile(file, "bad.tre");
    FAIL("expected RuleError");
  } catch (const RuleError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("the bundled ruleset compiles") {
  const auto file = ruledsl::parse_rules(default_rules_text(), std::string(kDefaultRulesName));
  CHECK(file.rules.size() == 8);
  CHECK_NOTHROW(ruledsl::compile(file));
  const auto from_disk = ruledsl::load_rules(std::string(KIDEX_TEST_DATA_DIR) + "/default.tre");
  CHECK(from_disk == file);
}

TEST_CASE("print then parse is the identity on trees") {
  std::mt19937_64 rng(21);
  const std::string alphabet = "abcd";
  for (int i = 0; i < 2000; ++i) {
    int next_group = 0;
    const oracle::Pat pat = oracle::random_pattern(rng, alphabet, 3, next_group);
    std::string src = "$s = \"/[ab]/\"\n$P = ( /a/ | [{word:$s} & {TAG:/x|y/}] )\n";
    src += "{ ruleType: \"tokens\", pattern: ( $P " + oracle::render(pat, rng) +
           " ), action: ( Annotate($0, K, \"q\\\"\\\\\"), Annotate($0, L, CAPTURED_TEXT) ), stage: " +
           std::to_string(i % 3) + " }\n";
    const auto first = ruledsl::parse_rules(src);
    const std::string printed = ruledsl::print(first);
    const auto second = ruledsl::parse_rules(printed);
    CHECK(second == first);
    CHECK(ruledsl::print(second) == printed);
    CHECK_NOTHROW(ruledsl::compile(second));
  }
}
