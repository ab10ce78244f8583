#include "kidex/tabrec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kidex/error.hpp"
#include "kidex/text_util.hpp"

namespace kidex::tabrec {

namespace {

std::string squash(std::string_view s) {
  return text::collapse_spaces(text::fold_case(s));
}

bool contains_anchor(std::string_view haystack, const std::vector<std::string>& needles) {
  const std::string h = squash(haystack);
  for (const auto& n : needles) {
    const std::string sn = squash(n);
    if (!sn.empty() && h.find(sn) != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> read_strings(const Json& j, const std::string& path) {
  if (!j.is_array()) throw IngestError("field '" + path + "' must be an array of strings");
  std::vector<std::string> out;
  for (const Json& s : j) {
    if (!s.is_string()) throw IngestError("field '" + path + "' must be an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

double read_real(const Json& j, const std::string& path) {
  if (!j.is_number()) throw IngestError("field '" + path + "' must be a number");
  return j.get<double>();
}

std::int64_t center2_x(const BBox& b) { return std::int64_t{b.left} + b.right; }

// Lines of a cell text, trimmed, empty lines dropped.
std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t nl = s.find('\n', pos);
    if (nl == std::string_view::npos) nl = s.size();
    std::string line = text::collapse_spaces(s.substr(pos, nl - pos));
    if (!line.empty()) out.push_back(std::move(line));
    pos = nl + 1;
  }
  return out;
}

std::optional<int> leading_years(std::string_view text, const std::vector<std::string>& year_words) {
  const std::string norm = normalize::normalize_label(text);
  // Find "<int> <year-word>" anywhere in the label.
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < norm.size()) {
    std::size_t sp = norm.find(' ', pos);
    if (sp == std::string::npos) sp = norm.size();
    words.push_back(norm.substr(pos, sp - pos));
    pos = sp + 1;
  }
  std::set<std::string> yw;
  for (const auto& w : year_words) yw.insert(normalize::normalize_label(w));
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    const auto& w = words[i];
    if (w.empty() || w.size() > 3 || !std::all_of(w.begin(), w.end(), text::is_ascii_digit)) continue;
    if (yw.count(words[i + 1])) return std::stoi(w);
  }
  return std::nullopt;
}

struct PeriodColumn {
  BBox bbox;
  std::optional<int> years;
  bool recommended = false;
  Period period = Period::recommended;
};

std::vector<PeriodColumn> find_period_columns(const RawTable& table, const LabelsConfig& labels) {
  std::vector<PeriodColumn> cols;
  for (const auto& row : table.rows) {
    for (const auto& cell : row) {
      if (cell.text.empty() || parse_cell_number(cell.text, labels)) continue;
      PeriodColumn c;
      c.bbox = cell.bbox;
      c.years = leading_years(cell.text, labels.year_words);
      c.recommended = contains_anchor(cell.text, labels.recommended_phrases);
      if (c.years || c.recommended) cols.push_back(c);
    }
  }
  if (cols.empty()) return cols;
  // The recommended column is the flagged one, else the one with most years.
  std::size_t rec = cols.size();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].recommended) {
      rec = i;
      break;
    }
  }
  if (rec == cols.size()) {
    rec = 0;
    for (std::size_t i = 1; i < cols.size(); ++i) {
      if (cols[i].years.value_or(0) > cols[rec].years.value_or(0)) rec = i;
    }
  }
  std::optional<int> min_years;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i == rec || !cols[i].years) continue;
    if (!min_years || *cols[i].years < *min_years) min_years = cols[i].years;
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i == rec) {
      cols[i].period = Period::recommended;
    } else if (cols[i].years && cols[i].years == min_years) {
      cols[i].period = Period::initial;
    } else {
      cols[i].period = Period::intermediate;
    }
  }
  return cols;
}

std::optional<Period> period_at(const std::vector<PeriodColumn>& cols, const BBox& cell) {
  const std::int64_t cx2 = center2_x(cell);
  for (const auto& c : cols) {
    if (cx2 >= 2 * std::int64_t{c.bbox.left} && cx2 <= 2 * std::int64_t{c.bbox.right}) return c.period;
  }
  return std::nullopt;
}

std::vector<Period> ordinal_periods(std::size_t count) {
  switch (count) {
    case 1: return {Period::initial};
    case 2: return {Period::initial, Period::recommended};
    case 3: return {Period::initial, Period::intermediate, Period::recommended};
    default: return {};
  }
}

struct NumericCell {
  BBox bbox;
  normalize::ParsedNumber value;
};

// Index of the first cell matching any variant list in `families`, plus
// which family matched.
template <typename Key>
std::optional<std::pair<std::size_t, Key>> find_label(const std::vector<TableCell>& row,
                                                      const std::map<Key, std::vector<std::string>>& families) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    for (const auto& [key, variants] : families) {
      if (label_matches(row[i].text, variants)) return std::make_pair(i, key);
    }
  }
  return std::nullopt;
}

std::vector<NumericCell> numbers_after(const std::vector<TableCell>& row, std::size_t label_index,
                                       const LabelsConfig& labels) {
  std::vector<NumericCell> out;
  for (std::size_t i = label_index + 1; i < row.size(); ++i) {
    if (auto v = parse_cell_number(row[i].text, labels)) out.push_back({row[i].bbox, *v});
  }
  return out;
}

bool row_has_numbers(const std::vector<TableCell>& row, const LabelsConfig& labels) {
  return std::any_of(row.begin(), row.end(),
                     [&](const TableCell& c) { return parse_cell_number(c.text, labels).has_value(); });
}

std::string row_preview(const std::vector<TableCell>& row) {
  std::string s;
  for (const auto& c : row) {
    if (!s.empty()) s += " | ";
    s += c.text;
  }
  return s;
}

// Resolves periods for the numeric cells of one kind (money or percent) in a
// row: by header column when possible, else by ordinal position.
std::vector<std::optional<Period>> resolve_periods(const std::vector<const NumericCell*>& cells,
                                                   const std::vector<PeriodColumn>& cols,
                                                   bool& used_ordinal) {
  std::vector<std::optional<Period>> out;
  if (cells.empty()) return out;
  bool all_found = !cols.empty();
  for (const auto* c : cells) {
    out.push_back(period_at(cols, c->bbox));
    if (!out.back()) all_found = false;
  }
  if (all_found) return out;
  used_ordinal = true;
  const auto ord = ordinal_periods(cells.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = i < ord.size() ? std::optional<Period>(ord[i]) : std::nullopt;
  }
  return out;
}

MappedRecord map_performance(const RawTable& table, const LabelsConfig& labels) {
  MappedRecord out;
  PerformanceScenariosRecord rec;
  const auto cols = find_period_columns(table, labels);
  std::set<Period> periods;
  for (const auto& c : cols) periods.insert(c.period);
  bool used_ordinal = false;
  bool any_row = false;
  std::map<std::pair<Scenario, Period>, ScenarioValues> found;
  for (const auto& row : table.rows) {
    auto hit = find_label(row, labels.scenarios);
    if (!hit) {
      if (row_has_numbers(row, labels)) out.warnings.push_back("unmatched row: " + row_preview(row));
      continue;
    }
    any_row = true;
    const auto nums = numbers_after(row, hit->first, labels);
    std::vector<const NumericCell*> money, pct;
    for (const auto& n : nums) (n.value.percent ? pct : money).push_back(&n);
    for (auto* group : {&money, &pct}) {
      const auto ps = resolve_periods(*group, cols, used_ordinal);
      for (std::size_t i = 0; i < group->size(); ++i) {
        if (!ps[i]) {
          out.warnings.push_back("value without period column: " + row_preview(row));
          continue;
        }
        periods.insert(*ps[i]);
        auto& v = found[{hit->second, *ps[i]}];
        (group == &pct ? v.yield_pct : v.refund) = (*group)[i]->value.value;
      }
    }
  }
  for (Scenario s : kAllScenarios) {
    for (Period p : periods) {
      auto it = found.find({s, p});
      rec.entries[{s, p}] = it == found.end() ? ScenarioValues{} : it->second;
    }
  }
  if (used_ordinal) out.warnings.push_back("period labels unreadable; periods assigned by column order");
  if (!any_row) out.warnings.push_back("no data rows matched");
  out.record = std::move(rec);
  return out;
}

MappedRecord map_evolution(const RawTable& table, const LabelsConfig& labels) {
  MappedRecord out;
  CostsEvolutionRecord rec;
  const auto cols = find_period_columns(table, labels);
  std::set<Period> periods;
  for (const auto& c : cols) periods.insert(c.period);
  enum class RowKind { total, riy };
  const std::map<RowKind, std::vector<std::string>> families{{RowKind::total, labels.total_cost_rows},
                                                             {RowKind::riy, labels.riy_rows}};
  bool used_ordinal = false;
  bool any_row = false;
  std::map<Period, CostValues> found;
  for (const auto& row : table.rows) {
    auto hit = find_label(row, families);
    if (!hit) {
      if (row_has_numbers(row, labels)) out.warnings.push_back("unmatched row: " + row_preview(row));
      continue;
    }
    any_row = true;
    const auto nums = numbers_after(row, hit->first, labels);
    std::vector<const NumericCell*> money, pct;
    for (const auto& n : nums) (n.value.percent ? pct : money).push_back(&n);
    for (auto* group : {&money, &pct}) {
      const auto ps = resolve_periods(*group, cols, used_ordinal);
      for (std::size_t i = 0; i < group->size(); ++i) {
        if (!ps[i]) {
          out.warnings.push_back("value without period column: " + row_preview(row));
          continue;
        }
        periods.insert(*ps[i]);
        auto& v = found[*ps[i]];
        (group == &pct ? v.riy_pct : v.total_cost) = (*group)[i]->value.value;
      }
    }
  }
  for (Period p : periods) {
    auto it = found.find(p);
    rec.entries[p] = it == found.end() ? CostValues{} : it->second;
  }
  if (used_ordinal) out.warnings.push_back("period labels unreadable; periods assigned by column order");
  if (!any_row) out.warnings.push_back("no data rows matched");
  out.record = std::move(rec);
  return out;
}

MappedRecord map_composition(const RawTable& table, const LabelsConfig& labels) {
  MappedRecord out;
  CostsCompositionRecord rec;
  for (const auto& row : table.rows) {
    auto hit = find_label(row, labels.categories);
    if (!hit) {
      if (row_has_numbers(row, labels)) out.warnings.push_back("unmatched row: " + row_preview(row));
      continue;
    }
    MaybeDecimal value;
    for (const auto& n : numbers_after(row, hit->first, labels)) {
      if (n.value.percent) {
        value = n.value.value;
        break;
      }
    }
    if (!value) out.warnings.push_back("no percentage in row: " + row_preview(row));
    rec.entries[hit->second] = value;
  }
  if (rec.entries.empty()) out.warnings.push_back("no data rows matched");
  out.record = std::move(rec);
  return out;
}

}  // namespace

TabConfig default_tab_config() {
  TabConfig cfg;
  cfg.anchors[TableType::performance_scenarios] = {
      {"Scenari di performance", "Performance scenarios"},
      {"Scenario di stress", "Scenario sfavorevole", "Scenario moderato", "Scenario favorevole",
       "Stress scenario", "Unfavourable scenario", "Moderate scenario", "Favourable scenario"}};
  cfg.anchors[TableType::costs_evolution] = {
      {"Andamento dei costi nel tempo", "Costs over time"},
      {"Costi totali", "Impatto sul rendimento (RIY) per anno", "Total costs",
       "Impact on return (RIY) per year"}};
  cfg.anchors[TableType::costs_composition] = {
      {"Composizione dei costi", "Composition of costs"},
      {"Costi di ingresso", "Costi di uscita", "Entry costs", "Exit costs"}};
  return cfg;
}

void validate(const TabConfig& cfg) {
  auto unit = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw IngestError(std::string("field '") + name + "' must lie in (0,1]");
  };
  unit(cfg.confidence_threshold, "confidence_threshold");
  unit(cfg.alignment_factor_ratio, "alignment_factor_ratio");
  unit(cfg.enlargement_ratio, "enlargement_ratio");
  unit(cfg.ocr_iou_threshold, "ocr_iou_threshold");
  for (TableType t : kAllTableTypes) {
    auto it = cfg.anchors.find(t);
    if (it == cfg.anchors.end() || it->second.page_strings.empty() || it->second.table_strings.empty()) {
      throw IngestError("anchors for '" + std::string(to_string(t)) +
                        "' need at least one page string and one table string");
    }
  }
}

std::vector<std::string> LabelsConfig::all_labels() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : scenarios) out.insert(out.end(), v.begin(), v.end());
  for (const auto& [k, v] : categories) out.insert(out.end(), v.begin(), v.end());
  out.insert(out.end(), total_cost_rows.begin(), total_cost_rows.end());
  out.insert(out.end(), riy_rows.begin(), riy_rows.end());
  return out;
}

LabelsConfig default_labels_config() {
  LabelsConfig l;
  l.scenarios = {
      {Scenario::stress, {"Scenario di stress", "Stress scenario"}},
      {Scenario::unfavourable, {"Scenario sfavorevole", "Unfavourable scenario"}},
      {Scenario::moderate, {"Scenario moderato", "Moderate scenario"}},
      {Scenario::favourable, {"Scenario favorevole", "Favourable scenario"}},
  };
  l.categories = {
      {CostCategory::entry, {"Costi di ingresso", "Entry costs"}},
      {CostCategory::exit, {"Costi di uscita", "Exit costs"}},
      {CostCategory::portfolio_transaction,
       {"Costi di transazione del portafoglio", "Portfolio transaction costs"}},
      {CostCategory::other_recurrent, {"Altri costi correnti", "Other ongoing costs"}},
      {CostCategory::performance_fees, {"Commissioni di performance", "Performance fees"}},
      {CostCategory::overperformance_fees,
       {"Commissioni di overperformance", "Carried interests", "Overperformance fees"}},
  };
  l.total_cost_rows = {"Costi totali", "Total costs"};
  l.riy_rows = {"Impatto sul rendimento (RIY) per anno", "Impact on return (RIY) per year"};
  l.year_words = {"anno", "anni", "year", "years"};
  l.recommended_phrases = {"periodo di detenzione raccomandato", "recommended holding period"};
  return l;
}

TabConfig parse_tab_config(const Json& j, TabConfig base) {
  if (!j.is_object()) throw IngestError("table config must be a JSON object");
  if (j.contains("confidence_threshold")) base.confidence_threshold = read_real(j["confidence_threshold"], "confidence_threshold");
  if (j.contains("alignment_factor_ratio")) base.alignment_factor_ratio = read_real(j["alignment_factor_ratio"], "alignment_factor_ratio");
  if (j.contains("enlargement_ratio")) base.enlargement_ratio = read_real(j["enlargement_ratio"], "enlargement_ratio");
  if (j.contains("ocr_iou_threshold")) base.ocr_iou_threshold = read_real(j["ocr_iou_threshold"], "ocr_iou_threshold");
  if (j.contains("anchors")) {
    const Json& a = j["anchors"];
    if (!a.is_object()) throw IngestError("field 'anchors' must be an object");
    for (const auto& [key, val] : a.items()) {
      auto type = table_type_from_string(key);
      if (!type) throw IngestError("field 'anchors." + key + "' is not a table type");
      if (!val.is_object()) throw IngestError("field 'anchors." + key + "' must be an object");
      Anchors& an = base.anchors[*type];
      if (val.contains("page_strings")) an.page_strings = read_strings(val["page_strings"], "anchors." + key + ".page_strings");
      if (val.contains("table_strings")) an.table_strings = read_strings(val["table_strings"], "anchors." + key + ".table_strings");
    }
  }
  validate(base);
  return base;
}

LabelsConfig parse_labels_config(const Json& j, LabelsConfig base) {
  if (!j.is_object()) throw IngestError("labels config must be a JSON object");
  if (j.contains("scenarios")) {
    const Json& s = j["scenarios"];
    if (!s.is_object()) throw IngestError("field 'scenarios' must be an object");
    for (const auto& [key, val] : s.items()) {
      auto sc = scenario_from_string(key);
      if (!sc) throw IngestError("field 'scenarios." + key + "' is not a scenario");
      base.scenarios[*sc] = read_strings(val, "scenarios." + key);
    }
  }
  if (j.contains("categories")) {
    const Json& c = j["categories"];
    if (!c.is_object()) throw IngestError("field 'categories' must be an object");
    for (const auto& [key, val] : c.items()) {
      auto cat = cost_category_from_string(key);
      if (!cat) throw IngestError("field 'categories." + key + "' is not a cost category");
      base.categories[*cat] = read_strings(val, "categories." + key);
    }
  }
  if (j.contains("total_cost_rows")) base.total_cost_rows = read_strings(j["total_cost_rows"], "total_cost_rows");
  if (j.contains("riy_rows")) base.riy_rows = read_strings(j["riy_rows"], "riy_rows");
  if (j.contains("year_words")) base.year_words = read_strings(j["year_words"], "year_words");
  if (j.contains("recommended_phrases")) base.recommended_phrases = read_strings(j["recommended_phrases"], "recommended_phrases");
  if (j.contains("locale_hint")) {
    const Json& lh = j["locale_hint"];
    if (lh == "it") base.locale = normalize::LocaleHint::it;
    else if (lh == "en") base.locale = normalize::LocaleHint::en;
    else throw IngestError("field 'locale_hint' must be \"it\" or \"en\"");
  }
  if (j.contains("confusions")) {
    const Json& c = j["confusions"];
    if (!c.is_object()) throw IngestError("field 'confusions' must be an object");
    if (c.contains("pairs")) {
      if (!c["pairs"].is_object()) throw IngestError("field 'confusions.pairs' must be an object");
      base.confusions.pairs.clear();
      for (const auto& [from, to] : c["pairs"].items()) {
        if (!to.is_string()) throw IngestError("field 'confusions.pairs' must map characters to characters");
        const auto f = text::decode_utf8(from);
        const auto t = text::decode_utf8(to.get<std::string>());
        if (f.size() != 1 || t.size() != 1) {
          throw IngestError("field 'confusions.pairs' must map single characters");
        }
        base.confusions.pairs[f[0]] = t[0];
      }
    }
    if (c.contains("numeric_context_only")) {
      if (!c["numeric_context_only"].is_boolean()) throw IngestError("field 'confusions.numeric_context_only' must be a boolean");
      base.confusions.numeric_context_only = c["numeric_context_only"].get<bool>();
    }
    if (!base.confusions.valid()) throw IngestError("field 'confusions.pairs' contains a cycle");
  }
  return base;
}

Json to_json(const TabConfig& cfg) {
  Json j;
  j["confidence_threshold"] = cfg.confidence_threshold;
  j["alignment_factor_ratio"] = cfg.alignment_factor_ratio;
  j["enlargement_ratio"] = cfg.enlargement_ratio;
  j["ocr_iou_threshold"] = cfg.ocr_iou_threshold;
  Json a = Json::object();
  for (const auto& [t, an] : cfg.anchors) {
    a[std::string(to_string(t))] = {{"page_strings", an.page_strings}, {"table_strings", an.table_strings}};
  }
  j["anchors"] = a;
  return j;
}

Json to_json(const LabelsConfig& cfg) {
  Json j;
  Json s = Json::object();
  for (const auto& [k, v] : cfg.scenarios) s[std::string(to_string(k))] = v;
  j["scenarios"] = s;
  Json c = Json::object();
  for (const auto& [k, v] : cfg.categories) c[std::string(to_string(k))] = v;
  j["categories"] = c;
  j["total_cost_rows"] = cfg.total_cost_rows;
  j["riy_rows"] = cfg.riy_rows;
  j["year_words"] = cfg.year_words;
  j["recommended_phrases"] = cfg.recommended_phrases;
  j["locale_hint"] = cfg.locale == normalize::LocaleHint::it ? "it" : "en";
  Json pairs = Json::object();
  for (const auto& [f, t] : cfg.confusions.pairs) {
    pairs[text::encode_utf8(std::u32string(1, f))] = text::encode_utf8(std::u32string(1, t));
  }
  j["confusions"] = {{"pairs", pairs}, {"numeric_context_only", cfg.confusions.numeric_context_only}};
  return j;
}

std::map<TableType, int> identify_pages(const std::vector<std::string>& pages, const TabConfig& cfg) {
  std::map<TableType, int> out;
  for (const auto& [type, anchors] : cfg.anchors) {
    for (std::size_t p = 0; p < pages.size(); ++p) {
      if (contains_anchor(pages[p], anchors.page_strings)) {
        out[type] = static_cast<int>(p) + 1;
        break;
      }
    }
  }
  return out;
}

FilteredDetections filter_detections(const PageDetections& page, const TabConfig& cfg) {
  FilteredDetections out;
  for (const auto& d : page.detections) {
    if (d.confidence < cfg.confidence_threshold) continue;
    (d.is_table() ? out.tables : out.cells).push_back(d);
  }
  return out;
}

std::vector<std::vector<Detection>> assign_cells(const std::vector<Detection>& tables,
                                                 const std::vector<Detection>& cells) {
  std::vector<std::vector<Detection>> out(tables.size());
  for (const auto& cell : cells) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t t = 0; t < tables.size(); ++t) {
      if (!contains_center(tables[t].bbox, cell.bbox)) continue;
      const double v = iou(cell.bbox, tables[t].bbox);
      if (v > best_iou) {
        best_iou = v;
        best = t;
      }
    }
    if (best) out[*best].push_back(cell);
  }
  return out;
}

BBox enlarge_bbox(const BBox& cell, double ratio, int page_width, int page_height) {
  constexpr double kEps = 1e-9;
  const double dx = ratio * static_cast<double>(cell.width());
  const double dy = ratio * static_cast<double>(cell.height());
  BBox out;
  out.left = static_cast<int>(std::floor(cell.left - dx + kEps));
  out.top = static_cast<int>(std::floor(cell.top - dy + kEps));
  out.right = static_cast<int>(std::ceil(cell.right + dx - kEps));
  out.bottom = static_cast<int>(std::ceil(cell.bottom + dy - kEps));
  out.left = std::clamp(out.left, 0, page_width);
  out.right = std::clamp(out.right, 0, page_width);
  out.top = std::clamp(out.top, 0, page_height);
  out.bottom = std::clamp(out.bottom, 0, page_height);
  return out;
}

std::optional<std::string> cell_text(const BBox& cell, const std::vector<OcrEntry>& ocr,
                                     const TabConfig& cfg, int page_width, int page_height) {
  const BBox big = enlarge_bbox(cell, cfg.enlargement_ratio, page_width, page_height);
  const OcrEntry* best = nullptr;
  double best_iou = 0.0;
  for (const auto& e : ocr) {
    const double v = iou(big, e.bbox);
    if (v > best_iou) {
      best_iou = v;
      best = &e;
    }
  }
  if (!best || best_iou < cfg.ocr_iou_threshold) return std::nullopt;
  return best->text;
}

std::optional<TableType> identify_table(const std::vector<TableCell>& cells, const TabConfig& cfg) {
  std::vector<TableType> hits;
  for (const auto& [type, anchors] : cfg.anchors) {
    for (const auto& c : cells) {
      if (contains_anchor(c.text, anchors.table_strings)) {
        hits.push_back(type);
        break;
      }
    }
  }
  if (hits.empty()) return std::nullopt;
  if (hits.size() > 1) {
    throw AmbiguousTableError("table matches anchors of both '" + std::string(to_string(hits[0])) +
                              "' and '" + std::string(to_string(hits[1])) + "'");
  }
  return hits.front();
}

double alignment_factor(const std::vector<TableCell>& cells, double ratio) {
  if (cells.empty()) return 0.0;
  std::vector<std::int64_t> h;
  h.reserve(cells.size());
  for (const auto& c : cells) h.push_back(c.bbox.height());
  std::sort(h.begin(), h.end());
  const std::size_t n = h.size();
  const double median = n % 2 ? static_cast<double>(h[n / 2])
                              : (static_cast<double>(h[n / 2 - 1]) + static_cast<double>(h[n / 2])) / 2.0;
  return ratio * median;
}

RawTable group_rows(std::vector<TableCell> cells, double alignment_factor_ratio) {
  RawTable out;
  if (cells.empty()) return out;
  const double factor = alignment_factor(cells, alignment_factor_ratio);
  std::stable_sort(cells.begin(), cells.end(), [](const TableCell& a, const TableCell& b) {
    return std::tie(a.bbox.top, a.bbox.left) < std::tie(b.bbox.top, b.bbox.left);
  });
  out.table_bbox = cells.front().bbox;
  for (auto& c : cells) {
    out.table_bbox.left = std::min(out.table_bbox.left, c.bbox.left);
    out.table_bbox.top = std::min(out.table_bbox.top, c.bbox.top);
    out.table_bbox.right = std::max(out.table_bbox.right, c.bbox.right);
    out.table_bbox.bottom = std::max(out.table_bbox.bottom, c.bbox.bottom);
    if (out.rows.empty() || c.bbox.top - out.rows.back().front().bbox.top > factor) {
      out.rows.emplace_back();
    }
    out.rows.back().push_back(std::move(c));
  }
  for (auto& row : out.rows) {
    std::stable_sort(row.begin(), row.end(),
                     [](const TableCell& a, const TableCell& b) { return a.bbox.left < b.bbox.left; });
  }
  return out;
}

std::vector<TableCell> split_multiline(const std::vector<TableCell>& row,
                                       const std::vector<std::string>& labels,
                                       const LabelsConfig& cleaning) {
  std::vector<TableCell> out;
  for (const auto& cell : row) {
    const auto parts = split_lines(cell.text);
    bool split = parts.size() >= 2 && cell.bbox.height() >= static_cast<std::int64_t>(parts.size());
    std::set<std::string> used;
    for (std::size_t i = 0; i < parts.size() && split; ++i) {
      if (parse_cell_number(parts[i], cleaning)) continue;
      bool matched = false;
      for (const auto& l : labels) {
        if (label_matches(parts[i], {l}) && used.insert(normalize::normalize_label(l)).second) {
          matched = true;
          break;
        }
      }
      split = matched;
    }
    if (!split) {
      out.push_back(cell);
      continue;
    }
    const std::int64_t h = cell.bbox.height();
    const std::int64_t k = static_cast<std::int64_t>(parts.size());
    for (std::int64_t i = 0; i < k; ++i) {
      TableCell part;
      part.bbox = cell.bbox;
      part.bbox.top = static_cast<int>(cell.bbox.top + i * h / k);
      part.bbox.bottom = static_cast<int>(cell.bbox.top + (i + 1) * h / k);
      part.text = parts[static_cast<std::size_t>(i)];
      out.push_back(std::move(part));
    }
  }
  return out;
}

std::optional<ExtractedTable> extract_table(const PageDetections& page,
                                            std::optional<TableType> type_hint,
                                            const TabConfig& cfg, const LabelsConfig& labels) {
  const auto filtered = filter_detections(page, cfg);
  const auto assigned = assign_cells(filtered.tables, filtered.cells);
  const auto all_labels = labels.all_labels();
  for (std::size_t t = 0; t < filtered.tables.size(); ++t) {
    std::vector<TableCell> cells;
    for (const auto& d : assigned[t]) {
      auto txt = cell_text(d.bbox, page.ocr, cfg, page.page_width, page.page_height);
      cells.push_back({d.bbox, txt.value_or("")});
    }
    if (cells.empty()) continue;
    auto type = identify_table(cells, cfg);
    if (!type || (type_hint && *type != *type_hint)) continue;
    RawTable table = group_rows(std::move(cells), cfg.alignment_factor_ratio);
    table.table_bbox = filtered.tables[t].bbox;
    for (auto& row : table.rows) row = split_multiline(row, all_labels, labels);
    return ExtractedTable{*type, std::move(table)};
  }
  return std::nullopt;
}

std::optional<normalize::ParsedNumber> parse_cell_number(std::string_view text, const LabelsConfig& labels) {
  if (text.empty()) return std::nullopt;
  return normalize::parse_number(normalize::fix_confusions(text, labels.confusions), labels.locale);
}

bool label_matches(std::string_view text, const std::vector<std::string>& variants) {
  const std::string t = normalize::normalize_label(text);
  if (t.empty()) return false;
  for (const auto& v : variants) {
    const std::string nv = normalize::normalize_label(v);
    if (nv.empty()) continue;
    if (t == nv) return true;
    if (t.size() > nv.size() && t.compare(0, nv.size(), nv) == 0 && t[nv.size()] == ' ') return true;
  }
  return false;
}

MappedRecord map_to_record(TableType type, const RawTable& table, const LabelsConfig& labels) {
  switch (type) {
    case TableType::performance_scenarios: return map_performance(table, labels);
    case TableType::costs_evolution: return map_evolution(table, labels);
    case TableType::costs_composition: return map_composition(table, labels);
  }
  return {};
}

OrderedJson to_json(const TableRow& row) {
  OrderedJson j;
  j["doc_id"] = row.doc_id;
  j["page"] = row.page ? OrderedJson(*row.page) : OrderedJson(nullptr);
  j["type"] = std::string(to_string(row.type));
  j["status"] = row.extracted ? "extracted" : "missing";
  j["record"] = row.record ? OrderedJson::parse(record_to_json(*row.record).dump()) : OrderedJson(nullptr);
  return j;
}

TableRow table_row_from_json(const Json& j) {
  if (!j.is_object()) throw IngestError("table row must be a JSON object");
  TableRow row;
  auto str = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw IngestError(std::string("missing field '") + key + "'");
    if (!it->is_string()) throw IngestError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };
  row.doc_id = str("doc_id");
  const std::string type = str("type");
  auto t = table_type_from_string(type);
  if (!t) throw IngestError("field 'type' has unknown value '" + type + "'");
  row.type = *t;
  const std::string status = str("status");
  if (status != "extracted" && status != "missing") {
    throw IngestError("field 'status' must be \"extracted\" or \"missing\"");
  }
  row.extracted = status == "extracted";
  if (auto it = j.find("page"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw IngestError("field 'page' must be an integer or null");
    row.page = it->get<int>();
  }
  if (auto it = j.find("record"); it != j.end() && !it->is_null()) {
    row.record = record_from_json(row.type, *it);
  }
  if (row.extracted && !row.record) throw IngestError("field 'record' is required when status is extracted");
  return row;
}

std::vector<TableRow> read_table_rows(std::string_view jsonl) {
  std::vector<TableRow> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(table_row_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw IngestError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    } catch (const IngestError& e) {
      throw IngestError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void sort_rows(std::vector<TableRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    return std::tie(a.doc_id, a.type) < std::tie(b.doc_id, b.type);
  });
}

}  // namespace kidex::tabrec
