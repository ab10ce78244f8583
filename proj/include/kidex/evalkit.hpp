#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kidex/core.hpp"
#include "kidex/matcher.hpp"
#include "kidex/tabrec.hpp"

namespace kidex::evalkit {

struct GoldField {
  std::string doc_id;
  std::string field;
  std::string value;

  friend bool operator==(const GoldField&, const GoldField&) = default;
  friend auto operator<=>(const GoldField&, const GoldField&) = default;
};

struct GoldSet {
  std::vector<GoldField> fields;
  std::vector<tabrec::TableRow> tables;  // one per (doc_id, type)
};

/// Gold text fields as JSONL {doc_id, field, value}. Duplicate triples or
/// malformed lines throw IngestError with the line number.
std::vector<GoldField> read_gold_fields(std::string_view jsonl);
void write_gold_fields(std::ostream& out, const std::vector<GoldField>& fields);

/// Reads <dir>/fields.jsonl and <dir>/tables.jsonl. A missing file throws
/// IngestError naming it.
GoldSet load_gold(const std::string& dir);

struct FieldScore {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f_measure() const;
};

double precision(std::size_t tp, std::size_t fp);
double recall(std::size_t tp, std::size_t fn);
/// Harmonic mean; 0 when p + r = 0.
double f_measure(double p, double r);

struct TableScore {
  std::size_t gold = 0;       // gold tables present in the documents
  std::size_t extracted = 0;  // extracted with a record equal to gold
  std::size_t incorrect = 0;  // extracted, record differs
  std::size_t missing = 0;    // not extracted
  std::size_t spurious = 0;   // extracted where gold has no table
};

/// Document-level view: a document counts as complete when every gold field
/// of it was predicted with the right value.
struct DocumentScore {
  std::size_t documents = 0;
  std::size_t complete = 0;
  std::size_t with_missing_field = 0;
  std::size_t with_wrong_value = 0;
};

struct EvalReport {
  std::map<std::string, FieldScore> fields;
  FieldScore micro;
  std::map<TableType, TableScore> tables;
  DocumentScore documents;
};

/// Scores predictions against gold. Values are compared after collapsing
/// whitespace, case-sensitively; repeated prediction triples count once.
EvalReport evaluate(const GoldSet& gold, const std::vector<matcher::ExtractionResult>& predictions,
                    const std::vector<tabrec::TableRow>& table_predictions);

/// Human-readable report: per-field P/R/F, micro totals, then the table
/// Extracted/Missing summary.
void print_report(std::ostream& out, const EvalReport& report);
OrderedJson report_to_json(const EvalReport& report);

/// Table-type columns with Extracted and Missing rows (and Incorrect when
/// non-zero).
void print_table_summary(std::ostream& out, const std::map<TableType, TableScore>& tables);

}  // namespace kidex::evalkit
