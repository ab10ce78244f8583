#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kidex/annotate.hpp"
#include "kidex/evalkit.hpp"
#include "kidex/matcher.hpp"
#include "kidex/ruledsl.hpp"
#include "kidex/tabrec.hpp"
#include "kidex/textprep.hpp"

namespace kidex::pipeline {

/// Settings shared by all commands. Loaded from an optional JSON config
/// file; command-line flags override it.
struct Config {
  std::optional<std::string> rules_path;
  std::optional<std::string> sections_path;
  std::optional<std::string> tab_config_path;
  std::optional<std::string> labels_path;
  annotate::SectionConfig sections = annotate::default_section_config();
  tabrec::TabConfig tab = tabrec::default_tab_config();
  tabrec::LabelsConfig labels = tabrec::default_labels_config();
  std::size_t workers = 1;
  bool strict = false;
};

/// Keys: "rules", "sections", "tab_config", "labels" (paths, relative to the
/// config file), "workers", "strict", "locale_hint", "confusions", and any
/// TabConfig field. Referenced files must exist. Throws IngestError.
Config load_config(const std::string& path);

/// Loads the section, table and label files named in `cfg` into it.
void load_referenced_files(Config& cfg);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception (lowest index) is rethrown after all tasks finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Regular files in `dir` with one of the given extensions, sorted by name.
/// Throws IngestError if `dir` is not a directory.
std::vector<std::string> list_files(const std::string& dir, const std::vector<std::string>& extensions);

/// Loads rules from `path`, or the bundled ruleset when empty. Throws RuleError.
ruledsl::CompiledRules load_compiled_rules(const std::optional<std::string>& path);

/// Extraction over one document already loaded.
std::vector<matcher::ExtractionResult> extract_document(Document doc, const ruledsl::CompiledRules& rules,
                                                        const annotate::SectionConfig& sections);

/// textprep, section annotation and rule matching over every .txt/.json
/// file of `files`; results sorted.
std::vector<matcher::ExtractionResult> annotate_files(const std::vector<std::string>& files,
                                                      const ruledsl::CompiledRules& rules,
                                                      const annotate::SectionConfig& sections,
                                                      std::size_t workers);

struct TablesOutcome {
  std::vector<tabrec::TableRow> rows;  // sorted by (doc_id, type)
  std::vector<std::string> warnings;
  std::size_t malformed_files = 0;
  std::map<TableType, evalkit::TableScore> summary;  // extracted / missing
};

/// Table rows for one document from its page texts and per-page detections
/// (indexed by page number). Warnings are appended to `warnings`.
std::vector<tabrec::TableRow> tables_for_document(const textprep::PageText& text,
                                                  const std::map<int, PageDetections>& pages,
                                                  const Config& cfg, std::vector<std::string>& warnings);

/// `pages_path` is a page-text file or a directory of them.
TablesOutcome tables_corpus(const std::string& masks_dir, const std::string& pages_path, const Config& cfg);

/// Full command-line entry point. Exit codes: 0 success, 1 input/output
/// error, 2 rule-file error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kidex::pipeline
