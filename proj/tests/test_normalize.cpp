#include <random>

#include "doctest.h"
#include "kidex/normalize.hpp"
#include "oracles.hpp"

using namespace kidex;
using namespace kidex::normalize;

namespace {

std::string norm(const std::string& s, LocaleHint l = LocaleHint::it) {
  const auto v = normalize_number(s, l);
  return v ? v->to_string() : "<none>";
}

}  // namespace

TEST_CASE("normalize_number examples") {
  CHECK(norm("1.234,56") == "1234.56");
  CHECK(norm("\xE2\x82\xAC 9.915,45") == "9915.45");
  CHECK(norm("1.234") == "1234");
  CHECK(norm("-0,85 %") == "-0.85");
  CHECK(norm("abc") == "<none>");
  CHECK(norm("") == "<none>");
}

TEST_CASE("separator rules") {
  CHECK(norm("1,234.56") == "1234.56");
  CHECK(norm("1.234.567") == "1234567");
  CHECK(norm("1.234.567,8") == "1234567.8");
  CHECK(norm("12,5") == "12.5");
  CHECK(norm("12,500") == "12500");
  CHECK(norm("1.5") == "1.5");
  CHECK(norm("0.123") == "0.1230");
  CHECK(norm("1234.567") == "1234.5670");
  CHECK(norm("1,2,3") == "<none>");
  CHECK(norm("1.23.456") == "<none>");
  CHECK(norm("12,345,678") == "12345678");
  CHECK(norm("1.234,5.6") == "<none>");
  CHECK(norm("1..2") == "<none>");
  CHECK(norm(",5") == "<none>");
  CHECK(norm("5,") == "<none>");
  CHECK(norm("12 % x") == "<none>");
  CHECK(norm("- 3,5") == "-3.5");
  CHECK(norm("\xE2\x88\x92" "3,5") == "-3.5");
  CHECK(norm("EUR 10.000") == "10000");
  CHECK(norm("10.000 \xE2\x82\xAC") == "10000");
  CHECK(norm("1\xC2\xA0" "234,5") == "1234.5");
}

TEST_CASE("english locale swaps the separator roles") {
  CHECK(norm("1,234", LocaleHint::en) == "1234");
  CHECK(norm("1,234.56", LocaleHint::en) == "1234.56");
  CHECK(norm("12.5", LocaleHint::en) == "12.5");
  CHECK(norm("12,5", LocaleHint::en) == "12.5");
}

TEST_CASE("parse_number marks percents") {
  const auto p = parse_number("-0,85%");
  REQUIRE(p);
  CHECK(p->percent);
  CHECK(p->value.to_string() == "-0.85");
  const auto q = parse_number("12,5");
  REQUIRE(q);
  CHECK_FALSE(q->percent);
}

TEST_CASE("strip_currency examples") {
  CHECK(strip_currency("EUR 10.000") == "10.000");
  CHECK(strip_currency("10.000 \xE2\x82\xAC") == "10.000");
  CHECK(strip_currency("EURO zone") == "EURO zone");
  CHECK(strip_currency("usd 5 chf") == "5");
  CHECK(strip_currency("$5") == "5");
  CHECK(strip_currency("\xC2\xA3 3 GBP") == "3");
  CHECK(strip_currency("CHFX 1") == "CHFX 1");
}

TEST_CASE("strip_currency never removes digits") {
  const std::vector<std::string> pieces = {"1", "2", "EUR", "eur", " ", "\xE2\x82\xAC", "$", "X", "CHF", ",", "9"};
  std::mt19937_64 rng(2);
  for (int i = 0; i < 3000; ++i) {
    std::string s;
    for (int k = 0; k < 8; ++k) s += pieces[rng() % pieces.size()];
    auto digits = [](const std::string& x) {
      std::string d;
      for (char c : x) {
        if (c >= '0' && c <= '9') d += c;
      }
      return d;
    };
    CHECK(digits(strip_currency(s)) == digits(s));
  }
}

TEST_CASE("fix_confusions examples") {
  CHECK(fix_confusions("1/2,50") == "172,50");
  CHECK(fix_confusions("a/b") == "a/b");
  CHECK(fix_confusions("//") == "//");
  CHECK(fix_confusions("\xE2\x82\xAC 1./50,00") == "\xE2\x82\xAC 1.750,00");
  CHECK(fix_confusions("1/%") == "17%");
  ConfusionMap everywhere;
  everywhere.numeric_context_only = false;
  CHECK(fix_confusions("a/b", everywhere) == "a7b");
  ConfusionMap letters;
  letters.pairs = {{U'O', U'0'}, {U'/', U'7'}};
  CHECK(fix_confusions("10O/", letters) == "1007");
  CHECK(fix_confusions("1O/", letters) == "1O/");
}

TEST_CASE("confusion maps reject chains") {
  ConfusionMap m;
  CHECK(m.valid());
  m.pairs[U'7'] = U'1';
  CHECK_FALSE(m.valid());
}

TEST_CASE("noisy generator-style numbers repair") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 3000; ++i) {
    const long cents = static_cast<long>(rng() % 10'000'000);
    std::string s = std::to_string(cents / 100);
    std::string grouped;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k > 0 && (s.size() - k) % 3 == 0) grouped += '.';
      grouped += s[k];
    }
    const std::string frac = std::to_string(100 + cents % 100).substr(1);
    const std::string clean = "\xE2\x82\xAC " + grouped + "," + frac;
    std::string noisy = clean;
    std::size_t digits = 0;
    for (char c : clean) digits += c >= '0' && c <= '9';
    std::size_t budget = digits / 2;
    for (char& c : noisy) {
      if (c == '7' && budget > 0 && rng() % 2 == 0) {
        c = '/';
        --budget;
      }
    }
    const auto fixed = normalize_number(fix_confusions(noisy));
    REQUIRE(fixed);
    CHECK(*fixed == *normalize_number(clean));
    CHECK(oracle::same_value(fixed->units(), fixed->scale(), cents, 2));
  }
}

TEST_CASE("canonical output is a fixed point") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::int64_t> units(-9'999'999, 9'999'999);
  for (int i = 0; i < 5000; ++i) {
    const Decimal d = Decimal::from_scaled(units(rng), static_cast<int>(rng() % 6));
    const auto back = normalize_number(d.to_string());
    REQUIRE(back);
    CHECK(*back == d);
  }
}

TEST_CASE("normalize_label") {
  CHECK(normalize_label("  Scenario di STRESS: ") == "scenario di stress");
  CHECK(normalize_label("Impatto sul rendimento (RIY) per anno") == "impatto sul rendimento riy per anno");
  CHECK(normalize_label("Costi\ndi  ingresso") == "costi di ingresso");
  CHECK(normalize_label("\xC3\x88 gi\xC3\xA0") == "\xC3\xA8 gi\xC3\xA0");
}
