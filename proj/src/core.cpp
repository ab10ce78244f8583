#include "kidex/core.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kidex/error.hpp"

namespace kidex {

void validate(const Document& doc) {
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    if (t.begin >= t.end) throw IngestError("token " + std::to_string(i) + " has an empty span");
    if (t.index != i) throw IngestError("token " + std::to_string(i) + " has a wrong index");
    if (t.end > doc.text.size() || doc.text.compare(t.begin, t.end - t.begin, t.text) != 0) {
      throw IngestError("token " + std::to_string(i) + " does not match the source text");
    }
    if (i > 0 && doc.tokens[i - 1].end > t.begin) {
      throw IngestError("token " + std::to_string(i) + " overlaps its predecessor");
    }
  }
  for (const Annotation& a : doc.annotations) {
    if (a.key.empty()) throw IngestError("annotation with empty key");
    if (a.first > a.last || a.last >= doc.tokens.size()) {
      throw IngestError("annotation " + a.key + " references an invalid token range");
    }
  }
  if (doc.pages) {
    for (std::size_t i = 1; i < doc.pages->size(); ++i) {
      if ((*doc.pages)[i] <= (*doc.pages)[i - 1]) {
        throw IngestError("page-break offsets are not strictly increasing");
      }
    }
  }
}

double iou(const BBox& a, const BBox& b) noexcept {
  const std::int64_t ix = std::max<std::int64_t>(
      0, std::int64_t{std::min(a.right, b.right)} - std::max(a.left, b.left));
  const std::int64_t iy = std::max<std::int64_t>(
      0, std::int64_t{std::min(a.bottom, b.bottom)} - std::max(a.top, b.top));
  const std::int64_t inter = ix * iy;
  if (inter == 0) return 0.0;
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool contains_center(const BBox& outer, const BBox& inner) noexcept {
  // Doubled coordinates keep the midpoint integral.
  const std::int64_t cx2 = std::int64_t{inner.left} + inner.right;
  const std::int64_t cy2 = std::int64_t{inner.top} + inner.bottom;
  return cx2 >= 2 * std::int64_t{outer.left} && cx2 <= 2 * std::int64_t{outer.right} &&
         cy2 >= 2 * std::int64_t{outer.top} && cy2 <= 2 * std::int64_t{outer.bottom};
}

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const E (&values)[N]) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

constexpr DetectionClass kAllDetectionClasses[] = {
    DetectionClass::bordered_table, DetectionClass::borderless_table, DetectionClass::cell};

}  // namespace

std::string_view to_string(DetectionClass v) {
  switch (v) {
    case DetectionClass::bordered_table: return "bordered_table";
    case DetectionClass::borderless_table: return "borderless_table";
    case DetectionClass::cell: return "cell";
  }
  return "?";
}

std::string_view to_string(TableType v) {
  switch (v) {
    case TableType::performance_scenarios: return "performance_scenarios";
    case TableType::costs_evolution: return "costs_evolution";
    case TableType::costs_composition: return "costs_composition";
  }
  return "?";
}

std::string_view to_string(Scenario v) {
  switch (v) {
    case Scenario::stress: return "stress";
    case Scenario::unfavourable: return "unfavourable";
    case Scenario::moderate: return "moderate";
    case Scenario::favourable: return "favourable";
  }
  return "?";
}

std::string_view to_string(Period v) {
  switch (v) {
    case Period::initial: return "initial";
    case Period::intermediate: return "intermediate";
    case Period::recommended: return "recommended";
  }
  return "?";
}

std::string_view to_string(CostCategory v) {
  switch (v) {
    case CostCategory::entry: return "entry";
    case CostCategory::exit: return "exit";
    case CostCategory::portfolio_transaction: return "portfolio_transaction";
    case CostCategory::other_recurrent: return "other_recurrent";
    case CostCategory::performance_fees: return "performance_fees";
    case CostCategory::overperformance_fees: return "overperformance_fees";
  }
  return "?";
}

std::optional<DetectionClass> detection_class_from_string(std::string_view s) {
  return lookup(s, kAllDetectionClasses);
}
std::optional<TableType> table_type_from_string(std::string_view s) {
  return lookup(s, kAllTableTypes);
}
std::optional<Scenario> scenario_from_string(std::string_view s) {
  return lookup(s, kAllScenarios);
}
std::optional<Period> period_from_string(std::string_view s) { return lookup(s, kAllPeriods); }
std::optional<CostCategory> cost_category_from_string(std::string_view s) {
  return lookup(s, kAllCostCategories);
}

TableType record_type(const TableRecord& record) noexcept {
  switch (record.index()) {
    case 0: return TableType::performance_scenarios;
    case 1: return TableType::costs_evolution;
    default: return TableType::costs_composition;
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

const Json& field(const Json& j, const char* name, const std::string& path) {
  if (!j.is_object()) throw IngestError("'" + path + "' must be an object");
  auto it = j.find(name);
  if (it == j.end()) {
    throw IngestError("missing field '" + (path.empty() ? "" : path + ".") + name + "'");
  }
  return *it;
}

std::string join(const std::string& path, const char* name) {
  return path.empty() ? std::string(name) : path + "." + name;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

int get_int(const Json& j, const char* name, const std::string& path) {
  const Json& v = field(j, name, path);
  if (!v.is_number_integer()) throw IngestError("field '" + join(path, name) + "' must be an integer");
  return v.get<int>();
}

std::size_t get_size(const Json& j, const char* name, const std::string& path) {
  const Json& v = field(j, name, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw IngestError("field '" + join(path, name) + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const Json& j, const char* name, const std::string& path) {
  const Json& v = field(j, name, path);
  if (!v.is_string()) throw IngestError("field '" + join(path, name) + "' must be a string");
  return v.get<std::string>();
}

const Json& get_array(const Json& j, const char* name, const std::string& path) {
  const Json& v = field(j, name, path);
  if (!v.is_array()) throw IngestError("field '" + join(path, name) + "' must be an array");
  return v;
}

BBox parse_bbox(const Json& j, const std::string& path) {
  BBox b{get_int(j, "left", path), get_int(j, "top", path), get_int(j, "right", path),
         get_int(j, "bottom", path)};
  if (!b.valid()) throw IngestError("field '" + path + "' is not a valid box");
  return b;
}

OcrEntry parse_ocr(const Json& j, const std::string& path) {
  return OcrEntry{parse_bbox(field(j, "bbox", path), join(path, "bbox")),
                  get_string(j, "text", path)};
}

Json decimal_json(const MaybeDecimal& d) { return d ? Json(d->to_string()) : Json(nullptr); }

MaybeDecimal parse_decimal(const Json& j, const char* name, const std::string& path) {
  const Json& v = field(j, name, path);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw IngestError("field '" + join(path, name) + "' must be a string or null");
  auto d = Decimal::parse(v.get<std::string>());
  if (!d) throw IngestError("field '" + join(path, name) + "' is not a canonical decimal");
  return d;
}

template <typename E>
E parse_enum(const Json& j, const char* name, const std::string& path,
             std::optional<E> (*conv)(std::string_view)) {
  const std::string s = get_string(j, name, path);
  auto v = conv(s);
  if (!v) throw IngestError("field '" + join(path, name) + "' has unknown value '" + s + "'");
  return *v;
}

}  // namespace

void to_json(Json& j, const BBox& b) {
  j = Json{{"left", b.left}, {"top", b.top}, {"right", b.right}, {"bottom", b.bottom}};
}
void from_json(const Json& j, BBox& b) { b = parse_bbox(j, "bbox"); }

void to_json(Json& j, const Detection& d) {
  j = Json{{"class", to_string(d.cls)}, {"confidence", d.confidence}, {"bbox", d.bbox}};
}

namespace {
Detection parse_detection(const Json& j, const std::string& path) {
  Detection d;
  d.cls = parse_enum<DetectionClass>(j, "class", path, detection_class_from_string);
  const Json& c = field(j, "confidence", path);
  if (!c.is_number()) throw IngestError("field '" + join(path, "confidence") + "' must be a number");
  d.confidence = c.get<double>();
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw IngestError("field '" + join(path, "confidence") + "' must lie in [0,1]");
  }
  d.bbox = parse_bbox(field(j, "bbox", path), join(path, "bbox"));
  return d;
}
}  // namespace

void from_json(const Json& j, Detection& d) { d = parse_detection(j, "detection"); }

void to_json(Json& j, const OcrEntry& e) { j = Json{{"bbox", e.bbox}, {"text", e.text}}; }
void from_json(const Json& j, OcrEntry& e) { e = parse_ocr(j, "ocr"); }

void to_json(Json& j, const PageDetections& p) {
  j = Json{{"doc_id", p.doc_id},         {"page", p.page},
           {"page_width", p.page_width}, {"page_height", p.page_height},
           {"detections", p.detections}, {"ocr", p.ocr}};
}

void from_json(const Json& j, PageDetections& p) {
  PageDetections out;
  out.doc_id = get_string(j, "doc_id", "");
  out.page = get_int(j, "page", "");
  if (out.page < 1) throw IngestError("field 'page' must be >= 1");
  out.page_width = get_int(j, "page_width", "");
  out.page_height = get_int(j, "page_height", "");
  if (out.page_width <= 0 || out.page_height <= 0) {
    throw IngestError("fields 'page_width'/'page_height' must be positive");
  }
  const Json& dets = get_array(j, "detections", "");
  for (std::size_t i = 0; i < dets.size(); ++i) {
    out.detections.push_back(parse_detection(dets[i], index_path("detections", i)));
  }
  const Json& ocr = get_array(j, "ocr", "");
  for (std::size_t i = 0; i < ocr.size(); ++i) {
    out.ocr.push_back(parse_ocr(ocr[i], index_path("ocr", i)));
  }
  auto inside = [&](const BBox& b) {
    return b.left >= 0 && b.top >= 0 && b.right <= out.page_width && b.bottom <= out.page_height;
  };
  for (std::size_t i = 0; i < out.detections.size(); ++i) {
    if (!inside(out.detections[i].bbox)) {
      throw IngestError("field '" + index_path("detections", i) + ".bbox' lies outside the page");
    }
  }
  for (std::size_t i = 0; i < out.ocr.size(); ++i) {
    if (!inside(out.ocr[i].bbox)) {
      throw IngestError("field '" + index_path("ocr", i) + ".bbox' lies outside the page");
    }
  }
  p = std::move(out);
}

void to_json(Json& j, const RawTable& t) {
  j = Json{{"table_bbox", t.table_bbox}, {"rows", t.rows}};
}

void from_json(const Json& j, RawTable& t) {
  RawTable out;
  out.table_bbox = parse_bbox(field(j, "table_bbox", ""), "table_bbox");
  const Json& rows = get_array(j, "rows", "");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string rp = index_path("rows", r);
    if (!rows[r].is_array()) throw IngestError("field '" + rp + "' must be an array");
    std::vector<TableCell> row;
    for (std::size_t c = 0; c < rows[r].size(); ++c) row.push_back(parse_ocr(rows[r][c], index_path(rp, c)));
    out.rows.push_back(std::move(row));
  }
  t = std::move(out);
}

void to_json(Json& j, const Token& t) {
  j = Json{{"text", t.text}, {"begin", t.begin}, {"end", t.end}, {"index", t.index}};
}
void from_json(const Json& j, Token& t) {
  t = Token{get_string(j, "text", "token"), get_size(j, "begin", "token"),
            get_size(j, "end", "token"), get_size(j, "index", "token")};
}

void to_json(Json& j, const Annotation& a) {
  j = Json{{"key", a.key},     {"value", a.value},     {"first", a.first},
           {"last", a.last},   {"rule_id", a.rule_id}};
}
void from_json(const Json& j, Annotation& a) {
  a = Annotation{get_string(j, "key", "annotation"), get_string(j, "value", "annotation"),
                 get_size(j, "first", "annotation"), get_size(j, "last", "annotation"),
                 get_string(j, "rule_id", "annotation")};
}

void to_json(Json& j, const Document& d) {
  j = Json{{"doc_id", d.doc_id}, {"text", d.text}, {"tokens", d.tokens}, {"annotations", d.annotations}};
  if (d.pages) j["pages"] = *d.pages;
}
void from_json(const Json& j, Document& d) {
  Document out;
  out.doc_id = get_string(j, "doc_id", "");
  out.text = get_string(j, "text", "");
  out.tokens = get_array(j, "tokens", "").get<std::vector<Token>>();
  out.annotations = get_array(j, "annotations", "").get<std::vector<Annotation>>();
  if (j.contains("pages")) out.pages = get_array(j, "pages", "").get<std::vector<std::size_t>>();
  validate(out);
  d = std::move(out);
}

Json record_to_json(const TableRecord& record) {
  Json entries = Json::array();
  if (const auto* perf = std::get_if<PerformanceScenariosRecord>(&record)) {
    for (const auto& [key, v] : perf->entries) {
      entries.push_back(Json{{"scenario", to_string(key.first)},
                             {"period", to_string(key.second)},
                             {"refund", decimal_json(v.refund)},
                             {"yield_pct", decimal_json(v.yield_pct)}});
    }
  } else if (const auto* evo = std::get_if<CostsEvolutionRecord>(&record)) {
    for (const auto& [period, v] : evo->entries) {
      entries.push_back(Json{{"period", to_string(period)},
                             {"total_cost", decimal_json(v.total_cost)},
                             {"riy_pct", decimal_json(v.riy_pct)}});
    }
  } else {
    for (const auto& [cat, v] : std::get<CostsCompositionRecord>(record).entries) {
      entries.push_back(Json{{"category", to_string(cat)}, {"riy_pct", decimal_json(v)}});
    }
  }
  return Json{{"entries", std::move(entries)}};
}

TableRecord record_from_json(TableType type, const Json& j) {
  const Json& entries = get_array(j, "entries", "record");
  switch (type) {
    case TableType::performance_scenarios: {
      PerformanceScenariosRecord r;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string p = index_path("record.entries", i);
        auto s = parse_enum<Scenario>(entries[i], "scenario", p, scenario_from_string);
        auto per = parse_enum<Period>(entries[i], "period", p, period_from_string);
        r.entries[{s, per}] = ScenarioValues{parse_decimal(entries[i], "refund", p),
                                             parse_decimal(entries[i], "yield_pct", p)};
      }
      return r;
    }
    case TableType::costs_evolution: {
      CostsEvolutionRecord r;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string p = index_path("record.entries", i);
        auto per = parse_enum<Period>(entries[i], "period", p, period_from_string);
        r.entries[per] = CostValues{parse_decimal(entries[i], "total_cost", p),
                                    parse_decimal(entries[i], "riy_pct", p)};
      }
      return r;
    }
    case TableType::costs_composition: {
      CostsCompositionRecord r;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string p = index_path("record.entries", i);
        auto cat = parse_enum<CostCategory>(entries[i], "category", p, cost_category_from_string);
        r.entries[cat] = parse_decimal(entries[i], "riy_pct", p);
      }
      return r;
    }
  }
  throw IngestError("unknown table type");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view body) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.flush();
  if (!out) throw IoError("error while writing " + path);
}

PageDetections parse_page_detections(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw IngestError(std::string("malformed JSON: ") + e.what());
  }
  return j.get<PageDetections>();
}

PageDetections load_page_detections(const std::string& path) {
  try {
    return parse_page_detections(read_file(path));
  } catch (const IngestError& e) {
    throw IngestError(path + ": " + e.what());
  }
}

}  // namespace kidex
