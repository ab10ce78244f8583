#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kidex/core.hpp"
#include "kidex/normalize.hpp"

namespace kidex::tabrec {

struct Anchors {
  std::vector<std::string> page_strings;   // locate the page
  std::vector<std::string> table_strings;  // identify the table among cells
};

struct TabConfig {
  double confidence_threshold = 0.6;
  double alignment_factor_ratio = 0.5;  // times the median cell height
  double enlargement_ratio = 0.05;      // per side
  double ocr_iou_threshold = 0.5;
  std::map<TableType, Anchors> anchors;
};

/// Default thresholds plus Italian/English anchors for the three KID tables.
TabConfig default_tab_config();

/// Throws IngestError if a threshold or ratio lies outside (0,1] or a table
/// type lacks anchors.
void validate(const TabConfig& cfg);

/// Row labels used to map reconstructed tables onto records, plus the
/// cleaning settings applied to numeric cells.
struct LabelsConfig {
  std::map<Scenario, std::vector<std::string>> scenarios;
  std::map<CostCategory, std::vector<std::string>> categories;
  std::vector<std::string> total_cost_rows;
  std::vector<std::string> riy_rows;
  std::vector<std::string> year_words;            // "anno", "anni", "year", ...
  std::vector<std::string> recommended_phrases;   // "periodo di detenzione raccomandato", ...
  normalize::ConfusionMap confusions;
  normalize::LocaleHint locale = normalize::LocaleHint::it;

  /// Every row label, for multi-line cell splitting.
  std::vector<std::string> all_labels() const;
};

LabelsConfig default_labels_config();

/// Config files are JSON objects; omitted keys keep their defaults.
TabConfig parse_tab_config(const Json& j, TabConfig base = default_tab_config());
LabelsConfig parse_labels_config(const Json& j, LabelsConfig base = default_labels_config());
Json to_json(const TabConfig& cfg);
Json to_json(const LabelsConfig& cfg);

/// For each table type, the first page (1-based) whose text contains one of
/// its page strings, case-insensitively.
std::map<TableType, int> identify_pages(const std::vector<std::string>& pages, const TabConfig& cfg);

struct FilteredDetections {
  std::vector<Detection> tables;
  std::vector<Detection> cells;
};

/// Keeps detections with confidence >= threshold and splits tables from cells.
FilteredDetections filter_detections(const PageDetections& page, const TabConfig& cfg);

/// result[t] holds the cells assigned to tables[t]. A cell goes to the table
/// containing its center; among several, the one with the highest IoU
/// (first on ties). Cells centered outside every table are dropped.
std::vector<std::vector<Detection>> assign_cells(const std::vector<Detection>& tables,
                                                 const std::vector<Detection>& cells);

/// Moves each side outward by ratio * side length, rounding outward to whole
/// pixels, then clamps to the page.
BBox enlarge_bbox(const BBox& cell, double ratio, int page_width, int page_height);

/// Text of the OCR entry with the highest IoU against the enlarged cell, if
/// that IoU reaches the threshold.
std::optional<std::string> cell_text(const BBox& cell, const std::vector<OcrEntry>& ocr,
                                     const TabConfig& cfg, int page_width, int page_height);

/// The single table type with an anchor string in some cell text. Throws
/// AmbiguousTableError if anchors of two types are present.
std::optional<TableType> identify_table(const std::vector<TableCell>& cells, const TabConfig& cfg);

/// Clusters cells into rows: sorted by top, a cell joins the current row
/// when its top is within ratio * median-height of the row's first cell.
RawTable group_rows(std::vector<TableCell> cells, double alignment_factor_ratio);

/// Alignment factor for a cell set: ratio times the median cell height.
double alignment_factor(const std::vector<TableCell>& cells, double ratio);

/// Splits cells whose lines each are a distinct known label or a number into
/// vertically stacked cells.
std::vector<TableCell> split_multiline(const std::vector<TableCell>& row,
                                       const std::vector<std::string>& labels,
                                       const LabelsConfig& cleaning = default_labels_config());

struct ExtractedTable {
  TableType type;
  RawTable table;
};

/// Full per-page pipeline. Returns nullopt when no table on the page is
/// identified (or none matches `type_hint`).
std::optional<ExtractedTable> extract_table(const PageDetections& page,
                                            std::optional<TableType> type_hint,
                                            const TabConfig& cfg,
                                            const LabelsConfig& labels = default_labels_config());

struct MappedRecord {
  TableRecord record;
  std::vector<std::string> warnings;
};

/// Maps rows to schema entries via their label cells; numeric cells are
/// cleaned and parsed. Never fails: unmatched rows become warnings and
/// absent values are marked missing.
MappedRecord map_to_record(TableType type, const RawTable& table, const LabelsConfig& labels);

/// One line of the tables JSONL output:
/// {"doc_id","page","type","status":"extracted"|"missing","record"}.
/// page and record are null when missing.
struct TableRow {
  std::string doc_id;
  std::optional<int> page;
  TableType type = TableType::performance_scenarios;
  bool extracted = false;
  std::optional<TableRecord> record;

  friend bool operator==(const TableRow&, const TableRow&) = default;
};

OrderedJson to_json(const TableRow& row);
/// Throws IngestError naming the offending field.
TableRow table_row_from_json(const Json& j);
std::vector<TableRow> read_table_rows(std::string_view jsonl);
/// Orders by (doc_id, type).
void sort_rows(std::vector<TableRow>& rows);

/// Cleans and parses a numeric cell (confusions, currency, separators).
std::optional<normalize::ParsedNumber> parse_cell_number(std::string_view text,
                                                         const LabelsConfig& labels);

/// Matches `text` against label variants after label normalization: equal,
/// or `text` starts with the label followed by a word break.
bool label_matches(std::string_view text, const std::vector<std::string>& variants);

}  // namespace kidex::tabrec
