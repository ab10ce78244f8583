#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "kidex/error.hpp"
#include "kidex/generator.hpp"
#include "kidex/tabrec.hpp"
#include "oracles.hpp"

using namespace kidex;
using namespace kidex::tabrec;
using testing::cell;

namespace {

Detection det(DetectionClass cls, double conf, BBox b) { return Detection{cls, conf, b}; }

Decimal dec(const char* s) { return *Decimal::parse(s); }

std::vector<std::vector<int>> tops(const RawTable& t) {
  std::vector<std::vector<int>> out;
  for (const auto& row : t.rows) {
    out.emplace_back();
    for (const auto& c : row) out.back().push_back(c.bbox.top);
  }
  return out;
}

}  // namespace

TEST_CASE("identify_pages") {
  const auto cfg = default_tab_config();
  std::vector<std::string> pages(7, "testo");
  pages[4] = "Sezione: SCENARI DI PERFORMANCE e altro";
  pages[6] = "Scenari di performance";
  auto found = identify_pages(pages, cfg);
  CHECK(found.at(TableType::performance_scenarios) == 5);
  CHECK_FALSE(found.count(TableType::costs_evolution));

  pages[2] = "Composizione dei costi";
  pages[6] = "Composizione dei costi";
  found = identify_pages(pages, cfg);
  CHECK(found.at(TableType::costs_composition) == 3);
  CHECK(identify_pages({"nulla"}, cfg).empty());
}

TEST_CASE("filter_detections threshold is inclusive") {
  PageDetections page;
  page.page_width = page.page_height = 1000;
  page.detections = {det(DetectionClass::cell, 0.59, {0, 0, 10, 10}),
                     det(DetectionClass::cell, 0.6, {0, 0, 10, 10}),
                     det(DetectionClass::bordered_table, 0.9, {0, 0, 100, 100}),
                     det(DetectionClass::borderless_table, 0.61, {0, 0, 50, 50}),
                     det(DetectionClass::borderless_table, 0.2, {0, 0, 50, 50})};
  const auto f = filter_detections(page, default_tab_config());
  REQUIRE(f.cells.size() == 1);
  CHECK(f.cells[0].confidence == 0.6);
  CHECK(f.tables.size() == 2);

  page.detections.clear();
  const auto e = filter_detections(page, default_tab_config());
  CHECK(e.cells.empty());
  CHECK(e.tables.empty());
}

TEST_CASE("assign_cells by center and IoU") {
  const std::vector<Detection> tables = {det(DetectionClass::bordered_table, 1, {0, 0, 100, 100}),
                                         det(DetectionClass::bordered_table, 1, {0, 0, 50, 50})};
  const std::vector<Detection> cells = {det(DetectionClass::cell, 1, {10, 10, 40, 40}),
                                        det(DetectionClass::cell, 1, {60, 60, 90, 90}),
                                        det(DetectionClass::cell, 1, {150, 150, 160, 160})};
  const auto a = assign_cells(tables, cells);
  REQUIRE(a.size() == 2);
  // IoU 900/10000 against the outer table, 900/2500 against the inner one.
  REQUIRE(a[1].size() == 1);
  CHECK(a[1][0].bbox == BBox{10, 10, 40, 40});
  REQUIRE(a[0].size() == 1);
  CHECK(a[0][0].bbox == BBox{60, 60, 90, 90});
}

TEST_CASE("removing a detection never adds assigned cells") {
  std::mt19937_64 rng(31);
  auto box = [&] {
    const int l = static_cast<int>(rng() % 200);
    const int t = static_cast<int>(rng() % 200);
    return BBox{l, t, l + 1 + static_cast<int>(rng() % 120), t + 1 + static_cast<int>(rng() % 120)};
  };
  auto assigned = [](const std::vector<Detection>& tables, const std::vector<Detection>& cells) {
    std::multiset<std::tuple<int, int, int, int>> out;
    for (const auto& group : assign_cells(tables, cells)) {
      for (const auto& c : group) out.insert({c.bbox.left, c.bbox.top, c.bbox.right, c.bbox.bottom});
    }
    return out;
  };
  for (int i = 0; i < 500; ++i) {
    std::vector<Detection> tables, cells;
    for (int k = 0; k < 3; ++k) tables.push_back(det(DetectionClass::bordered_table, 1, box()));
    for (int k = 0; k < 6; ++k) cells.push_back(det(DetectionClass::cell, 1, box()));
    const auto full = assigned(tables, cells);
    for (std::size_t drop = 0; drop < tables.size(); ++drop) {
      auto fewer = tables;
      fewer.erase(fewer.begin() + static_cast<long>(drop));
      const auto part = assigned(fewer, cells);
      CHECK(std::includes(full.begin(), full.end(), part.begin(), part.end()));
    }
    auto fewer_cells = cells;
    fewer_cells.pop_back();
    const auto part = assigned(tables, fewer_cells);
    CHECK(std::includes(full.begin(), full.end(), part.begin(), part.end()));
  }
}

TEST_CASE("enlarge_bbox") {
  CHECK(enlarge_bbox({100, 100, 200, 150}, 0.05, 1000, 1000) == BBox{95, 97, 205, 153});
  CHECK(enlarge_bbox({0, 0, 40, 20}, 0.05, 1000, 1000) == BBox{0, 0, 42, 21});
  CHECK(enlarge_bbox({960, 980, 1000, 1000}, 0.05, 1000, 1000) == BBox{958, 979, 1000, 1000});
  CHECK(enlarge_bbox({100, 100, 200, 150}, 0.0, 1000, 1000) == BBox{100, 100, 200, 150});
  CHECK(enlarge_bbox({100, 100, 200, 200}, 0.1, 1000, 1000) == BBox{90, 90, 210, 210});
}

TEST_CASE("cell_text picks the best OCR entry above threshold") {
  const auto cfg = default_tab_config();
  const BBox c{100, 100, 200, 200};  // enlarged to (95,95,205,205), area 12100
  const std::vector<OcrEntry> ocr = {cell(95, 95, 205, 139, "low"), cell(95, 95, 205, 172, "high")};
  CHECK(cell_text(c, ocr, cfg, 1000, 1000) == "high");
  CHECK(cell_text(c, {ocr[0]}, cfg, 1000, 1000) == std::nullopt);
  CHECK(cell_text(c, {cell(95, 95, 205, 205, "exact")}, cfg, 1000, 1000) == "exact");
  CHECK(cell_text(c, {cell(500, 500, 600, 600, "far")}, cfg, 1000, 1000) == std::nullopt);
  CHECK(cell_text(c, {}, cfg, 1000, 1000) == std::nullopt);
}

TEST_CASE("identify_table") {
  const auto cfg = default_tab_config();
  CHECK(identify_table({cell(0, 0, 10, 10, "Scenario di stress"), cell(0, 20, 10, 30, "€ 9.915,45")}, cfg) ==
        TableType::performance_scenarios);
  CHECK(identify_table({cell(0, 0, 10, 10, "COSTI   TOTALI")}, cfg) == TableType::costs_evolution);
  CHECK(identify_table({cell(0, 0, 10, 10, "€ 9.915,45"), cell(0, 20, 10, 30, "-0,85%")}, cfg) == std::nullopt);
  CHECK(identify_table({}, cfg) == std::nullopt);
  CHECK_THROWS_WITH_AS(
      identify_table({cell(0, 0, 10, 10, "Scenario di stress"), cell(0, 20, 10, 30, "Costi di ingresso")}, cfg),
      doctest::Contains("costs_composition"), AmbiguousTableError);
}

TEST_CASE("group_rows examples") {
  // Height 10 everywhere, ratio 0.5: factor 5.
  auto t = group_rows({cell(0, 100, 10, 110), cell(20, 103, 30, 113), cell(0, 160, 10, 170)}, 0.5);
  CHECK(tops(t) == std::vector<std::vector<int>>{{100, 103}, {160}});
  t = group_rows({cell(0, 100, 10, 110), cell(20, 104, 30, 114), cell(40, 108, 50, 118)}, 0.5);
  CHECK(tops(t) == std::vector<std::vector<int>>{{100, 104}, {108}});
  t = group_rows({cell(5, 7, 9, 11, "x")}, 0.5);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].size() == 1);
  CHECK(t.table_bbox == BBox{5, 7, 9, 11});
  t = group_rows({cell(50, 0, 60, 10, "b"), cell(0, 2, 10, 12, "a")}, 0.5);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0].text == "a");
  CHECK(t.table_bbox == BBox{0, 0, 60, 12});
}

TEST_CASE("alignment factor uses the median height") {
  CHECK(alignment_factor({cell(0, 0, 1, 10), cell(0, 0, 1, 30), cell(0, 0, 1, 20)}, 0.5) == 10.0);
  CHECK(alignment_factor({cell(0, 0, 1, 10), cell(0, 0, 1, 30)}, 0.5) == 10.0);
}

TEST_CASE("group_rows is a partition with sorted rows") {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 1000; ++i) {
    std::vector<OcrEntry> cells;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) {
      const int top = static_cast<int>(rng() % 150);
      cells.push_back(cell(k * 20, top, k * 20 + 15, top + 5 + static_cast<int>(rng() % 30), std::to_string(k)));
    }
    std::shuffle(cells.begin(), cells.end(), rng);
    const RawTable t = group_rows(cells, 0.5);
    std::multiset<std::string> seen;
    int prev_top = -1;
    for (const auto& row : t.rows) {
      REQUIRE_FALSE(row.empty());
      int min_top = row[0].bbox.top;
      for (std::size_t c = 0; c < row.size(); ++c) {
        seen.insert(row[c].text);
        min_top = std::min(min_top, row[c].bbox.top);
        if (c > 0) CHECK(row[c - 1].bbox.left < row[c].bbox.left);
      }
      CHECK(min_top >= prev_top);
      prev_top = min_top;
    }
    CHECK(seen.size() == cells.size());
    CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == cells.size());
  }
}

TEST_CASE("split_multiline") {
  const auto labels = default_labels_config();
  const auto all = labels.all_labels();
  auto out = split_multiline({cell(0, 0, 100, 40, "Costi totali\n\xE2\x82\xAC 150")}, all);
  REQUIRE(out.size() == 2);
  CHECK(out[0].text == "Costi totali");
  CHECK(out[0].bbox == BBox{0, 0, 100, 20});
  CHECK(out[1].text == "\xE2\x82\xAC 150");
  CHECK(out[1].bbox == BBox{0, 20, 100, 40});

  out = split_multiline({cell(0, 0, 100, 40, "che potrebbe\nrimborsare")}, all);
  REQUIRE(out.size() == 1);
  CHECK(out[0].text == "che potrebbe\nrimborsare");

  out = split_multiline({cell(0, 0, 100, 40, "Costi totali")}, all);
  REQUIRE(out.size() == 1);

  // Two numeric lines split; a repeated label does not.
  out = split_multiline({cell(0, 0, 50, 30, "\xE2\x82\xAC 1.050\n2,5%")}, all);
  CHECK(out.size() == 2);
  out = split_multiline({cell(0, 0, 50, 30, "Costi totali\nCosti totali")}, all);
  CHECK(out.size() == 1);
}

TEST_CASE("map_to_record performance row") {
  RawTable t;
  t.rows = {{cell(0, 0, 100, 20, "Scenario di stress"), cell(120, 0, 200, 20, "\xE2\x82\xAC 9.915,45"),
             cell(220, 0, 300, 20, "-0,85%")}};
  const auto m = map_to_record(TableType::performance_scenarios, t, default_labels_config());
  const auto& rec = std::get<PerformanceScenariosRecord>(m.record);
  const auto& v = rec.entries.at({Scenario::stress, Period::initial});
  CHECK(v.refund == dec("9915.45"));
  CHECK(v.yield_pct == dec("-0.85"));
  CHECK(rec.entries.at({Scenario::moderate, Period::initial}) == ScenarioValues{});
  CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("map_to_record composition row") {
  RawTable t;
  t.rows = {{cell(0, 0, 100, 20, "Costi di ingresso"), cell(120, 0, 200, 20, "0,50%")}};
  const auto m = map_to_record(TableType::costs_composition, t, default_labels_config());
  const auto& rec = std::get<CostsCompositionRecord>(m.record);
  REQUIRE(rec.entries.size() == 1);
  CHECK(rec.entries.at(CostCategory::entry) == dec("0.5"));
}

TEST_CASE("map_to_record uses header period columns") {
  RawTable t;
  t.rows = {{cell(0, 0, 100, 20, "Investimento 10.000 EUR"), cell(100, 0, 200, 20, "1 anno"),
             cell(200, 0, 300, 20, "3 anni"), cell(300, 0, 400, 20, "5 anni (periodo di detenzione raccomandato)")},
            {cell(0, 30, 100, 50, "Costi totali"), cell(110, 30, 190, 50, "\xE2\x82\xAC 150"),
             cell(210, 30, 290, 50, "\xE2\x82\xAC 4/0"), cell(310, 30, 390, 50, "\xE2\x82\xAC 800")},
            {cell(0, 60, 100, 80, "Impatto sul rendimento (RIY) per anno"), cell(110, 60, 190, 80, "1,5%"),
             cell(310, 60, 390, 80, "1,6%")}};
  const auto m = map_to_record(TableType::costs_evolution, t, default_labels_config());
  const auto& rec = std::get<CostsEvolutionRecord>(m.record);
  REQUIRE(rec.entries.size() == 3);
  CHECK(rec.entries.at(Period::initial) == CostValues{dec("150"), dec("1.5")});
  CHECK(rec.entries.at(Period::intermediate) == CostValues{dec("470"), std::nullopt});
  CHECK(rec.entries.at(Period::recommended) == CostValues{dec("800"), dec("1.6")});
  CHECK(m.warnings.empty());
}

TEST_CASE("header-only table maps to an all-missing record") {
  RawTable t;
  t.rows = {{cell(0, 0, 100, 20, "Scenari"), cell(100, 0, 200, 20, "1 anno"),
             cell(200, 0, 300, 20, "5 anni (periodo di detenzione raccomandato)")}};
  const auto m = map_to_record(TableType::performance_scenarios, t, default_labels_config());
  const auto& rec = std::get<PerformanceScenariosRecord>(m.record);
  CHECK(rec.entries.size() == 8);
  for (const auto& [k, v] : rec.entries) CHECK(v == ScenarioValues{});
  CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("label matching") {
  CHECK(label_matches("Scenario di STRESS:", {"Scenario di stress"}));
  CHECK(label_matches("Costi di ingresso (una tantum)", {"Costi di ingresso"}));
  CHECK_FALSE(label_matches("Costi di ingressoX", {"Costi di ingresso"}));
  CHECK_FALSE(label_matches("Scenario", {"Scenario di stress"}));
}

TEST_CASE("extract_table on a generated page") {
  const auto doc = gen::generate_document(0, 42, 0.0);
  const auto perf_page = std::find_if(doc.masks.begin(), doc.masks.end(), [](const PageDetections& p) { return p.page == 2; });
  REQUIRE(perf_page != doc.masks.end());
  const auto labels = default_labels_config();
  const auto got = extract_table(*perf_page, TableType::performance_scenarios, default_tab_config(), labels);
  REQUIRE(got);
  CHECK(got->type == TableType::performance_scenarios);
  int scenario_rows = 0;
  for (const auto& row : got->table.rows) {
    for (Scenario s : kAllScenarios) {
      if (!row.empty() && label_matches(row[0].text, labels.scenarios.at(s))) ++scenario_rows;
    }
  }
  CHECK(scenario_rows == 4);
  const auto mapped = map_to_record(got->type, got->table, labels);
  const auto gold = std::find_if(doc.tables.begin(), doc.tables.end(),
                                 [](const TableRow& r) { return r.type == TableType::performance_scenarios; });
  REQUIRE(gold != doc.tables.end());
  CHECK(TableRecord(mapped.record) == *gold->record);

  CHECK_FALSE(extract_table(*perf_page, TableType::costs_evolution, default_tab_config(), labels));
  PageDetections empty = *perf_page;
  empty.detections.clear();
  CHECK_FALSE(extract_table(empty, std::nullopt, default_tab_config(), labels));

  // Header cells below threshold: the numbers survive but the table is lost.
  PageDetections faded = *perf_page;
  for (auto& d : faded.detections) {
    if (d.is_table()) continue;
    const auto text = cell_text(d.bbox, faded.ocr, default_tab_config(), faded.page_width, faded.page_height);
    if (text && identify_table({OcrEntry{d.bbox, *text}}, default_tab_config())) d.confidence = 0.3;
  }
  CHECK_FALSE(extract_table(faded, std::nullopt, default_tab_config(), labels));
}

TEST_CASE("tab and labels config parsing") {
  TabConfig cfg = parse_tab_config(Json::parse(R"({"confidence_threshold":0.7,"alignment_factor_ratio":0.4})"));
  CHECK(cfg.confidence_threshold == 0.7);
  CHECK(cfg.alignment_factor_ratio == 0.4);
  CHECK(cfg.enlargement_ratio == 0.05);
  CHECK_NOTHROW(validate(cfg));
  CHECK(parse_tab_config(to_json(cfg)).confidence_threshold == 0.7);
  cfg.confidence_threshold = 0.0;
  CHECK_THROWS_AS(validate(cfg), IngestError);
  cfg = default_tab_config();
  cfg.enlargement_ratio = 1.5;
  CHECK_THROWS_AS(validate(cfg), IngestError);
  cfg = default_tab_config();
  cfg.anchors[TableType::costs_evolution].table_strings.clear();
  CHECK_THROWS_AS(validate(cfg), IngestError);
  CHECK_THROWS_AS(parse_tab_config(Json::parse(R"({"confidence_threshold":"high"})")), IngestError);

  LabelsConfig l = parse_labels_config(Json::parse(R"({"locale_hint":"en","confusions":{"pairs":{"O":"0"}}})"));
  CHECK(l.locale == normalize::LocaleHint::en);
  CHECK(l.confusions.pairs.at(U'O') == U'0');
  const LabelsConfig back = parse_labels_config(to_json(l));
  CHECK(back.locale == l.locale);
  CHECK(back.scenarios == l.scenarios);
  CHECK(back.confusions.pairs == l.confusions.pairs);
}

TEST_CASE("table rows round trip through JSONL") {
  const auto doc = gen::generate_document(3, 42, 0.0);
  std::string body;
  for (const auto& r : doc.tables) body += to_json(r).dump() + "\n";
  TableRow missing;
  missing.doc_id = "kid_x";
  missing.type = TableType::costs_evolution;
  body += to_json(missing).dump() + "\n";
  auto rows = read_table_rows(body);
  REQUIRE(rows.size() == doc.tables.size() + 1);
  for (std::size_t i = 0; i < doc.tables.size(); ++i) CHECK(rows[i] == doc.tables[i]);
  CHECK(rows.back() == missing);
  CHECK(to_json(missing).dump() ==
        R"({"doc_id":"kid_x","page":null,"type":"costs_evolution","status":"missing","record":null})");
  CHECK_THROWS_WITH_AS(read_table_rows("{}\n"), doctest::Contains("1"), IngestError);
}
