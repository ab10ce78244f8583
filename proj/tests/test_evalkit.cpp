#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "kidex/error.hpp"
#include "kidex/evalkit.hpp"

using namespace kidex;
using namespace kidex::evalkit;

namespace {

matcher::ExtractionResult pred(const std::string& doc, const std::string& field, const std::string& value) {
  return {doc, field, value, field, 0, 0, "r:1"};
}

std::vector<matcher::ExtractionResult> as_predictions(const std::vector<GoldField>& g) {
  std::vector<matcher::ExtractionResult> out;
  for (const auto& f : g) out.push_back(pred(f.doc_id, f.field, f.value));
  return out;
}

GoldSet gold_of(std::vector<GoldField> fields) {
  GoldSet g;
  g.fields = std::move(fields);
  return g;
}

tabrec::TableRow table_row(const std::string& doc, TableType t, std::optional<TableRecord> rec) {
  tabrec::TableRow r;
  r.doc_id = doc;
  r.type = t;
  r.extracted = rec.has_value();
  r.page = rec ? std::optional<int>(2) : std::nullopt;
  r.record = std::move(rec);
  return r;
}

}  // namespace

TEST_CASE("metric definitions") {
  CHECK(precision(0, 0) == 1.0);
  CHECK(recall(0, 0) == 1.0);
  CHECK(f_measure(0.0, 0.0) == 0.0);
  CHECK(f_measure(0.98, 0.96) == doctest::Approx(0.9699).epsilon(0.0001));
  CHECK(f_measure(0.98, 0.94) == doctest::Approx(0.9596).epsilon(0.0001));
  FieldScore s{3, 1, 2};
  CHECK(s.precision() == 0.75);
  CHECK(s.recall() == 0.6);
  CHECK(s.f_measure() == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
}

TEST_CASE("identity predictions score perfectly") {
  const std::vector<GoldField> g = {{"d1", "ISIN", "CH0524993752"}, {"d1", "PRODUCT_NAME", "Alpha Fund"},
                                    {"d2", "ISIN", "IT0001234567"}};
  const auto r = evaluate(gold_of(g), as_predictions(g), {});
  for (const auto& [name, s] : r.fields) {
    CHECK(s.precision() == 1.0);
    CHECK(s.recall() == 1.0);
    CHECK(s.f_measure() == 1.0);
  }
  CHECK(r.documents.documents == 2);
  CHECK(r.documents.complete == 2);
}

TEST_CASE("a spurious prediction") {
  const auto r = evaluate(gold_of({{"d", "F", "A"}}), {pred("d", "F", "A"), pred("d", "F", "B")}, {});
  const auto& s = r.fields.at("F");
  CHECK(s.tp == 1);
  CHECK(s.fp == 1);
  CHECK(s.fn == 0);
  CHECK(s.precision() == 0.5);
  CHECK(s.recall() == 1.0);
}

TEST_CASE("value comparison collapses whitespace only") {
  const auto r = evaluate(gold_of({{"d", "F", "Alpha  Fund"}}), {pred("d", "F", " Alpha Fund ")}, {});
  CHECK(r.fields.at("F").tp == 1);
  const auto c = evaluate(gold_of({{"d", "F", "Alpha Fund"}}), {pred("d", "F", "alpha fund")}, {});
  CHECK(c.fields.at("F").tp == 0);
  CHECK(c.documents.with_wrong_value == 1);
}

TEST_CASE("repeated predictions count once; unknown documents are false positives") {
  const auto r = evaluate(gold_of({{"d", "F", "A"}}), {pred("d", "F", "A"), pred("d", "F", "A"), pred("zz", "F", "A")}, {});
  CHECK(r.fields.at("F").tp == 1);
  CHECK(r.fields.at("F").fp == 1);
  CHECK(r.micro.tp == 1);
}

TEST_CASE("document level counts") {
  const auto r = evaluate(gold_of({{"a", "F", "1"}, {"a", "G", "2"}, {"b", "F", "3"}, {"c", "F", "4"}}),
                          {pred("a", "F", "1"), pred("a", "G", "2"), pred("b", "F", "x")}, {});
  CHECK(r.documents.documents == 3);
  CHECK(r.documents.complete == 1);
  CHECK(r.documents.with_wrong_value == 1);
  CHECK(r.documents.with_missing_field == 1);
}

TEST_CASE("swapping gold and predictions swaps precision and recall") {
  std::mt19937_64 rng(6);
  const std::vector<std::string> docs = {"a", "b", "c"}, fields = {"F", "G"}, values = {"1", "2", "3"};
  auto random_set = [&] {
    std::vector<GoldField> out;
    for (const auto& d : docs) {
      for (const auto& f : fields) {
        for (const auto& v : values) {
          if (rng() % 3 == 0) out.push_back({d, f, v});
        }
      }
    }
    return out;
  };
  for (int i = 0; i < 300; ++i) {
    const auto g = random_set();
    const auto p = random_set();
    const auto fwd = evaluate(gold_of(g), as_predictions(p), {});
    const auto back = evaluate(gold_of(p), as_predictions(g), {});
    CHECK(fwd.micro.tp == back.micro.tp);
    CHECK(fwd.micro.fp == back.micro.fn);
    CHECK(fwd.micro.fn == back.micro.fp);
    CHECK(fwd.micro.precision() == back.micro.recall());
    CHECK(fwd.micro.recall() == back.micro.precision());

    auto shuffled = as_predictions(p);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto perm = evaluate(gold_of(g), shuffled, {});
    CHECK(report_to_json(perm).dump() == report_to_json(fwd).dump());
  }
}

TEST_CASE("table scores") {
  CostsCompositionRecord good;
  good.entries[CostCategory::entry] = Decimal::from_scaled(5, 1);
  CostsCompositionRecord bad = good;
  bad.entries[CostCategory::entry] = Decimal::from_scaled(6, 1);
  GoldSet g;
  g.tables = {table_row("a", TableType::costs_composition, good), table_row("b", TableType::costs_composition, good),
              table_row("c", TableType::costs_composition, good), table_row("d", TableType::costs_composition, std::nullopt)};
  const std::vector<tabrec::TableRow> p = {table_row("a", TableType::costs_composition, good),
                                           table_row("b", TableType::costs_composition, bad),
                                           table_row("d", TableType::costs_composition, good)};
  const auto r = evaluate(g, {}, p);
  const auto& s = r.tables.at(TableType::costs_composition);
  CHECK(s.gold == 3);
  CHECK(s.extracted == 1);
  CHECK(s.incorrect == 1);
  CHECK(s.missing == 1);
  CHECK(s.spurious == 1);

  std::ostringstream out;
  print_table_summary(out, r.tables);
  CHECK(out.str().find("Extracted") != std::string::npos);
  CHECK(out.str().find("Missing") != std::string::npos);
  CHECK(out.str().find("Incorrect") != std::string::npos);
}

TEST_CASE("gold field files") {
  const std::vector<GoldField> g = {{"d1", "ISIN", "CH0524993752"}, {"d2", "NAME", "a \"q\""}};
  std::ostringstream out;
  write_gold_fields(out, g);
  CHECK(read_gold_fields(out.str()) == g);
  CHECK_THROWS_WITH_AS(read_gold_fields(out.str() + out.str()), doctest::Contains("line 3"), IngestError);
  CHECK_THROWS_WITH_AS(read_gold_fields("{\"doc_id\":\"x\"}\n"), doctest::Contains("line 1"), IngestError);

  testing::TempDir dir("gold");
  CHECK_THROWS_WITH_AS(load_gold(dir.str()), doctest::Contains("fields.jsonl"), IngestError);
  testing::write_text(dir.path() / "fields.jsonl", out.str());
  CHECK_THROWS_WITH_AS(load_gold(dir.str()), doctest::Contains("tables.jsonl"), IngestError);
  testing::write_text(dir.path() / "tables.jsonl", "");
  CHECK(load_gold(dir.str()).fields == g);
}

TEST_CASE("printed report lists every field") {
  const auto r = evaluate(gold_of({{"d", "ISIN", "x"}, {"d", "NAME", "y"}}), {pred("d", "ISIN", "x")}, {});
  std::ostringstream out;
  print_report(out, r);
  CHECK(out.str().find("ISIN") != std::string::npos);
  CHECK(out.str().find("NAME") != std::string::npos);
  const auto j = report_to_json(r);
  CHECK(j["fields"]["NAME"]["recall"] == 0.0);
  CHECK(j["micro"]["tp"] == 1);
}
