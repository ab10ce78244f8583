#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "kidex/decimal.hpp"

namespace kidex {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Text documents
// ---------------------------------------------------------------------------

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offset, inclusive
  std::size_t end = 0;    // byte offset, exclusive
  std::size_t index = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Key/value label over the inclusive token range [first, last].
struct Annotation {
  std::string key;
  std::string value;
  std::size_t first = 0;
  std::size_t last = 0;
  std::string rule_id = "system";

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<Annotation> annotations;
  /// Byte offsets where pages 2..N start in `text`; absent for plain text.
  std::optional<std::vector<std::size_t>> pages;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Checks the token and annotation invariants; throws IngestError naming the
/// first violation.
void validate(const Document& doc);

// ---------------------------------------------------------------------------
// Page geometry
// ---------------------------------------------------------------------------

/// Axis-aligned box in page pixels, top-left origin.
struct BBox {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  bool valid() const noexcept { return left < right && top < bottom; }
  std::int64_t width() const noexcept { return std::int64_t{right} - left; }
  std::int64_t height() const noexcept { return std::int64_t{bottom} - top; }
  std::int64_t area() const noexcept { return width() * height(); }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b) noexcept;

/// True iff the exact midpoint of `inner` lies inside `outer`, edges included.
bool contains_center(const BBox& outer, const BBox& inner) noexcept;

enum class DetectionClass { bordered_table, borderless_table, cell };

struct Detection {
  DetectionClass cls = DetectionClass::cell;
  double confidence = 0.0;
  BBox bbox;

  bool is_table() const noexcept { return cls != DetectionClass::cell; }
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct OcrEntry {
  BBox bbox;
  std::string text;

  friend bool operator==(const OcrEntry&, const OcrEntry&) = default;
};

/// Masks and OCR output for one page, as produced by the external detector.
struct PageDetections {
  std::string doc_id;
  int page = 1;
  int page_width = 0;
  int page_height = 0;
  std::vector<Detection> detections;
  std::vector<OcrEntry> ocr;

  friend bool operator==(const PageDetections&, const PageDetections&) = default;
};

/// A table cell after OCR association; `text` is empty when nothing matched.
using TableCell = OcrEntry;

/// Cells grouped row-major; each row sorted by left.
struct RawTable {
  BBox table_bbox;
  std::vector<std::vector<TableCell>> rows;

  friend bool operator==(const RawTable&, const RawTable&) = default;
};

// ---------------------------------------------------------------------------
// Typed table records
// ---------------------------------------------------------------------------

enum class TableType { performance_scenarios, costs_evolution, costs_composition };
enum class Scenario { stress, unfavourable, moderate, favourable };
enum class Period { initial, intermediate, recommended };
enum class CostCategory {
  entry,
  exit,
  portfolio_transaction,
  other_recurrent,
  performance_fees,
  overperformance_fees
};

inline constexpr TableType kAllTableTypes[] = {TableType::performance_scenarios,
                                               TableType::costs_evolution,
                                               TableType::costs_composition};
inline constexpr Scenario kAllScenarios[] = {Scenario::stress, Scenario::unfavourable,
                                             Scenario::moderate, Scenario::favourable};
inline constexpr Period kAllPeriods[] = {Period::initial, Period::intermediate,
                                         Period::recommended};
inline constexpr CostCategory kAllCostCategories[] = {
    CostCategory::entry,           CostCategory::exit,
    CostCategory::portfolio_transaction, CostCategory::other_recurrent,
    CostCategory::performance_fees,      CostCategory::overperformance_fees};

std::string_view to_string(DetectionClass v);
std::string_view to_string(TableType v);
std::string_view to_string(Scenario v);
std::string_view to_string(Period v);
std::string_view to_string(CostCategory v);

std::optional<DetectionClass> detection_class_from_string(std::string_view s);
std::optional<TableType> table_type_from_string(std::string_view s);
std::optional<Scenario> scenario_from_string(std::string_view s);
std::optional<Period> period_from_string(std::string_view s);
std::optional<CostCategory> cost_category_from_string(std::string_view s);

/// A missing value is std::nullopt, never zero.
using MaybeDecimal = std::optional<Decimal>;

struct ScenarioValues {
  MaybeDecimal refund;
  MaybeDecimal yield_pct;
  friend bool operator==(const ScenarioValues&, const ScenarioValues&) = default;
};

struct PerformanceScenariosRecord {
  std::map<std::pair<Scenario, Period>, ScenarioValues> entries;
  friend bool operator==(const PerformanceScenariosRecord&,
                         const PerformanceScenariosRecord&) = default;
};

struct CostValues {
  MaybeDecimal total_cost;
  MaybeDecimal riy_pct;
  friend bool operator==(const CostValues&, const CostValues&) = default;
};

struct CostsEvolutionRecord {
  std::map<Period, CostValues> entries;
  friend bool operator==(const CostsEvolutionRecord&, const CostsEvolutionRecord&) = default;
};

struct CostsCompositionRecord {
  std::map<CostCategory, MaybeDecimal> entries;
  friend bool operator==(const CostsCompositionRecord&,
                         const CostsCompositionRecord&) = default;
};

using TableRecord =
    std::variant<PerformanceScenariosRecord, CostsEvolutionRecord, CostsCompositionRecord>;

TableType record_type(const TableRecord& record) noexcept;

// ---------------------------------------------------------------------------
// JSON mapping. Decimals are written as canonical strings, missing as null.
// from_json throws IngestError naming the offending field.
// ---------------------------------------------------------------------------

void to_json(Json& j, const BBox& b);
void from_json(const Json& j, BBox& b);
void to_json(Json& j, const Detection& d);
void from_json(const Json& j, Detection& d);
void to_json(Json& j, const OcrEntry& e);
void from_json(const Json& j, OcrEntry& e);
void to_json(Json& j, const PageDetections& p);
void from_json(const Json& j, PageDetections& p);
void to_json(Json& j, const RawTable& t);
void from_json(const Json& j, RawTable& t);
void to_json(Json& j, const Token& t);
void from_json(const Json& j, Token& t);
void to_json(Json& j, const Annotation& a);
void from_json(const Json& j, Annotation& a);
void to_json(Json& j, const Document& d);
void from_json(const Json& j, Document& d);

Json record_to_json(const TableRecord& record);
TableRecord record_from_json(TableType type, const Json& j);

/// Parses a PageDetections file body and checks every bbox against the page.
PageDetections parse_page_detections(std::string_view json_text);
PageDetections load_page_detections(const std::string& path);

/// Reads a whole file; throws IngestError if it cannot be opened.
std::string read_file(const std::string& path);

/// Writes `body` to `path`, creating missing parent directories. Throws
/// IoError.
void write_file(const std::string& path, std::string_view body);

}  // namespace kidex
