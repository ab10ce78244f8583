#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kidex/core.hpp"
#include "kidex/ruledsl.hpp"

namespace kidex::matcher {

/// Half-open token range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool empty() const noexcept { return begin == end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Match {
  std::string rule_id;
  Span span;  // never empty
  std::map<std::string, Span> captures;

  friend bool operator==(const Match&, const Match&) = default;
};

struct ExtractionResult {
  std::string doc_id;
  std::string field;
  std::string value;  // captured token texts joined by single spaces
  std::string tag;    // annotation value written by the action
  std::size_t first_token = 0;
  std::size_t last_token = 0;
  std::string rule_id;

  friend bool operator==(const ExtractionResult&, const ExtractionResult&) = default;
};

inline constexpr std::size_t kDefaultStepLimit = 1'000'000;

/// Leftmost non-empty match at or after `start` under backtracking
/// semantics: alternatives are tried in order, greedy repeats try more
/// iterations first, lazy repeats fewer. A repeat iteration beyond the
/// minimum count may not match the empty sequence. Throws
/// RuleComplexityError when one start position needs more than
/// `step_limit` steps.
std::optional<Match> find_match(const ruledsl::CompiledRule& rule, const Document& doc,
                                std::size_t start, std::size_t step_limit = kDefaultStepLimit);

struct RunOutput {
  Document doc;
  std::vector<ExtractionResult> results;
};

/// Applies all stages in ascending order and the rules of a stage in file
/// order. Each rule scans left to right for non-overlapping matches and
/// fires its actions on every match; new annotations are visible to every
/// later match. A result whose (field, span) was already produced is dropped.
RunOutput run_rules(const ruledsl::CompiledRules& rules, Document doc,
                    std::size_t step_limit = kDefaultStepLimit);

enum class ExportFormat { csv, jsonl };

/// Columns: doc_id,field,value,tag,first_token,last_token,rule_id.
void write_csv(std::ostream& out, const std::vector<ExtractionResult>& results);
void write_jsonl(std::ostream& out, const std::vector<ExtractionResult>& results);

/// Throws IoError if `path` cannot be written.
void export_results(const std::vector<ExtractionResult>& results, ExportFormat format,
                    const std::string& path);

std::vector<ExtractionResult> read_results_jsonl(std::string_view text);
std::vector<ExtractionResult> read_results_csv(std::string_view text);

/// Orders by (doc_id, field, first_token, last_token, value, rule_id).
void sort_results(std::vector<ExtractionResult>& results);

}  // namespace kidex::matcher
