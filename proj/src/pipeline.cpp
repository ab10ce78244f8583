#include "kidex/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "kidex/error.hpp"
#include "kidex/generator.hpp"
#include "kidex/resources.hpp"

namespace kidex::pipeline {

namespace fs = std::filesystem;

namespace {

const char* const kTabKeys[] = {"confidence_threshold", "alignment_factor_ratio", "enlargement_ratio",
                                "ocr_iou_threshold", "anchors"};

std::string resolve(const fs::path& base, const Json& v, const char* key) {
  if (!v.is_string()) throw IngestError(std::string("field '") + key + "' must be a path string");
  fs::path p(v.get<std::string>());
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p)) throw IngestError(std::string("field '") + key + "': file not found: " + p.string());
  return p.string();
}

Json parse_json_file(const std::string& path) {
  const std::string body = read_file(path);
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw IngestError(path + ": malformed JSON: " + e.what());
  }
}

// "<doc>_p<page>.json" -> "<doc>"
std::string doc_id_from_mask_name(const std::string& path) {
  const std::string stem = fs::path(path).stem().string();
  const auto p = stem.rfind("_p");
  return p == std::string::npos ? stem : stem.substr(0, p);
}

}  // namespace

Config load_config(const std::string& path) {
  Config cfg;
  const Json j = parse_json_file(path);
  if (!j.is_object()) throw IngestError(path + ": config must be a JSON object");
  const fs::path base = fs::path(path).parent_path();
  try {
    if (j.contains("rules")) cfg.rules_path = resolve(base, j["rules"], "rules");
    if (j.contains("sections")) cfg.sections_path = resolve(base, j["sections"], "sections");
    if (j.contains("tab_config")) cfg.tab_config_path = resolve(base, j["tab_config"], "tab_config");
    if (j.contains("labels")) cfg.labels_path = resolve(base, j["labels"], "labels");
    load_referenced_files(cfg);
    Json tab_over = Json::object();
    for (const char* k : kTabKeys) {
      if (j.contains(k)) tab_over[k] = j[k];
    }
    cfg.tab = tabrec::parse_tab_config(tab_over, cfg.tab);
    Json label_over = Json::object();
    for (const char* k : {"locale_hint", "confusions"}) {
      if (j.contains(k)) label_over[k] = j[k];
    }
    cfg.labels = tabrec::parse_labels_config(label_over, cfg.labels);
    if (j.contains("workers")) {
      if (!j["workers"].is_number_integer() || j["workers"].get<long long>() < 1) {
        throw IngestError("field 'workers' must be a positive integer");
      }
      cfg.workers = j["workers"].get<std::size_t>();
    }
    if (j.contains("strict")) {
      if (!j["strict"].is_boolean()) throw IngestError("field 'strict' must be a boolean");
      cfg.strict = j["strict"].get<bool>();
    }
  } catch (const IngestError& e) {
    throw IngestError(path + ": " + e.what());
  }
  return cfg;
}

void load_referenced_files(Config& cfg) {
  if (cfg.sections_path) cfg.sections = annotate::load_section_config(*cfg.sections_path);
  if (cfg.tab_config_path) {
    try {
      cfg.tab = tabrec::parse_tab_config(parse_json_file(*cfg.tab_config_path));
    } catch (const IngestError& e) {
      throw IngestError(*cfg.tab_config_path + ": " + e.what());
    }
  }
  if (cfg.labels_path) {
    try {
      cfg.labels = tabrec::parse_labels_config(parse_json_file(*cfg.labels_path));
    } catch (const IngestError& e) {
      throw IngestError(*cfg.labels_path + ": " + e.what());
    }
  }
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::string> list_files(const std::string& dir, const std::vector<std::string>& extensions) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IngestError("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) {
      out.push_back(entry.path().string());
    }
  }
  if (ec) throw IngestError("cannot list " + dir + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

ruledsl::CompiledRules load_compiled_rules(const std::optional<std::string>& path) {
  if (!path) {
    const std::string name(kDefaultRulesName);
    return ruledsl::compile(ruledsl::parse_rules(default_rules_text(), name), name);
  }
  return ruledsl::compile(ruledsl::load_rules(*path), *path);
}

std::vector<matcher::ExtractionResult> extract_document(Document doc, const ruledsl::CompiledRules& rules,
                                                        const annotate::SectionConfig& sections) {
  doc = annotate::annotate_sections(std::move(doc), sections);
  return matcher::run_rules(rules, std::move(doc)).results;
}

std::vector<matcher::ExtractionResult> annotate_files(const std::vector<std::string>& files,
                                                      const ruledsl::CompiledRules& rules,
                                                      const annotate::SectionConfig& sections,
                                                      std::size_t workers) {
  std::vector<std::vector<matcher::ExtractionResult>> per_doc(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) {
    const std::string doc_id = fs::path(files[i]).stem().string();
    per_doc[i] = extract_document(textprep::load_document(doc_id, files[i]), rules, sections);
  });
  std::vector<matcher::ExtractionResult> all;
  for (auto& r : per_doc) all.insert(all.end(), r.begin(), r.end());
  matcher::sort_results(all);
  return all;
}

std::vector<tabrec::TableRow> tables_for_document(const textprep::PageText& text,
                                                  const std::map<int, PageDetections>& pages,
                                                  const Config& cfg, std::vector<std::string>& warnings) {
  std::vector<tabrec::TableRow> rows;
  const auto located = tabrec::identify_pages(text.pages, cfg.tab);
  for (TableType type : kAllTableTypes) {
    tabrec::TableRow row;
    row.doc_id = text.doc_id;
    row.type = type;
    const std::string where = text.doc_id + " " + std::string(to_string(type)) + ": ";
    auto loc = located.find(type);
    if (loc == located.end()) {
      warnings.push_back(where + "no page mentions this table");
      rows.push_back(row);
      continue;
    }
    row.page = loc->second;
    auto page = pages.find(loc->second);
    if (page == pages.end()) {
      warnings.push_back(where + "no detections for page " + std::to_string(loc->second));
      rows.push_back(row);
      continue;
    }
    try {
      auto table = tabrec::extract_table(page->second, type, cfg.tab, cfg.labels);
      if (table) {
        auto mapped = tabrec::map_to_record(type, table->table, cfg.labels);
        for (const auto& w : mapped.warnings) warnings.push_back(where + w);
        row.extracted = true;
        row.record = std::move(mapped.record);
      } else {
        warnings.push_back(where + "table not identified on page " + std::to_string(loc->second));
      }
    } catch (const AmbiguousTableError& e) {
      warnings.push_back(where + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

TablesOutcome tables_corpus(const std::string& masks_dir, const std::string& pages_path, const Config& cfg) {
  TablesOutcome out;
  std::vector<std::string> page_files;
  std::error_code ec;
  if (fs::is_directory(pages_path, ec)) {
    page_files = list_files(pages_path, {".json"});
  } else {
    page_files = {pages_path};
  }
  std::vector<textprep::PageText> texts(page_files.size());
  parallel_for(page_files.size(), cfg.workers,
               [&](std::size_t i) { texts[i] = textprep::load_page_text(page_files[i]); });

  const auto mask_files = list_files(masks_dir, {".json"});
  std::vector<std::optional<PageDetections>> parsed(mask_files.size());
  std::vector<std::string> parse_errors(mask_files.size());
  parallel_for(mask_files.size(), cfg.workers, [&](std::size_t i) {
    try {
      parsed[i] = load_page_detections(mask_files[i]);
    } catch (const IngestError& e) {
      parse_errors[i] = e.what();
    }
  });
  std::map<std::string, std::map<int, PageDetections>> by_doc;
  std::set<std::string> broken;
  for (std::size_t i = 0; i < mask_files.size(); ++i) {
    if (!parsed[i]) {
      ++out.malformed_files;
      const std::string doc = doc_id_from_mask_name(mask_files[i]);
      broken.insert(doc);
      out.warnings.push_back("skipping " + doc + ": malformed mask file " + parse_errors[i]);
      continue;
    }
    by_doc[parsed[i]->doc_id][parsed[i]->page] = std::move(*parsed[i]);
  }

  std::sort(texts.begin(), texts.end(),
            [](const textprep::PageText& a, const textprep::PageText& b) { return a.doc_id < b.doc_id; });
  std::set<std::string> known;
  for (const auto& t : texts) known.insert(t.doc_id);
  for (const auto& [doc, pages] : by_doc) {
    if (!known.count(doc)) out.warnings.push_back("detections for unknown document " + doc + " ignored");
  }

  std::vector<std::vector<tabrec::TableRow>> rows(texts.size());
  std::vector<std::vector<std::string>> warnings(texts.size());
  static const std::map<int, PageDetections> kNoPages;
  parallel_for(texts.size(), cfg.workers, [&](std::size_t i) {
    const auto& t = texts[i];
    if (broken.count(t.doc_id)) {
      for (TableType type : kAllTableTypes) rows[i].push_back({t.doc_id, std::nullopt, type, false, std::nullopt});
      return;
    }
    auto it = by_doc.find(t.doc_id);
    rows[i] = tables_for_document(t, it == by_doc.end() ? kNoPages : it->second, cfg, warnings[i]);
  });
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.rows.insert(out.rows.end(), rows[i].begin(), rows[i].end());
    out.warnings.insert(out.warnings.end(), warnings[i].begin(), warnings[i].end());
  }
  tabrec::sort_rows(out.rows);
  for (TableType t : kAllTableTypes) out.summary[t];
  for (const auto& r : out.rows) {
    auto& s = out.summary[r.type];
    ++s.gold;
    ++(r.extracted ? s.extracted : s.missing);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

namespace {

struct GlobalOptions {
  std::string config;
  std::size_t workers = 0;  // 0: keep the config value
  bool strict = false;
};

Config effective_config(const GlobalOptions& g) {
  Config cfg = g.config.empty() ? Config{} : load_config(g.config);
  if (g.workers > 0) cfg.workers = g.workers;
  if (g.strict) cfg.strict = true;
  return cfg;
}

int cmd_annotate(const GlobalOptions& g, const std::string& rules, const std::string& sections,
                 const std::string& in_dir, const std::string& out_path, std::string format,
                 std::ostream& out, std::ostream& err) {
  Config cfg = effective_config(g);
  if (!rules.empty()) cfg.rules_path = rules;
  if (!sections.empty()) cfg.sections = annotate::load_section_config(sections);
  if (format.empty()) format = out_path.size() >= 6 && out_path.substr(out_path.size() - 6) == ".jsonl" ? "jsonl" : "csv";
  ruledsl::CompiledRules compiled;
  try {
    compiled = load_compiled_rules(cfg.rules_path);
  } catch (const RuleError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const auto files = list_files(in_dir, {".txt", ".json"});
  std::vector<matcher::ExtractionResult> results;
  try {
    results = annotate_files(files, compiled, cfg.sections, cfg.workers);
  } catch (const RuleComplexityError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  matcher::export_results(results, format == "jsonl" ? matcher::ExportFormat::jsonl : matcher::ExportFormat::csv,
                          out_path);
  out << "annotated " << files.size() << " documents, " << results.size() << " extractions\n";
  return 0;
}

int cmd_tables(const GlobalOptions& g, const std::string& masks, const std::string& pages,
               const std::string& out_path, const std::string& tab_config, const std::string& labels,
               std::ostream& out, std::ostream& err) {
  Config cfg = effective_config(g);
  if (!tab_config.empty()) cfg.tab_config_path = tab_config;
  if (!labels.empty()) cfg.labels_path = labels;
  load_referenced_files(cfg);
  const TablesOutcome result = tables_corpus(masks, pages, cfg);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  std::ostringstream body;
  for (const auto& r : result.rows) body << tabrec::to_json(r).dump() << '\n';
  write_file(out_path, body.str());
  evalkit::print_table_summary(out, result.summary);
  if (cfg.strict && result.malformed_files > 0) {
    err << "error: " << result.malformed_files << " malformed mask file(s)\n";
    return 1;
  }
  return 0;
}

int cmd_eval(const GlobalOptions&, const std::string& gold_dir, const std::string& pred_dir,
             const std::string& report_path, std::ostream& out, std::ostream& err) {
  const evalkit::GoldSet gold = evalkit::load_gold(gold_dir);
  const fs::path pred(pred_dir);
  std::vector<matcher::ExtractionResult> preds;
  const fs::path jsonl = pred / "fields.jsonl";
  const fs::path csv = pred / "fields.csv";
  const fs::path fields = fs::exists(jsonl) ? jsonl : csv;
  if (!fs::exists(fields)) throw IngestError("missing predictions file " + jsonl.string() + " (or fields.csv)");
  try {
    const std::string body = read_file(fields.string());
    preds = fields == jsonl ? matcher::read_results_jsonl(body) : matcher::read_results_csv(body);
  } catch (const IngestError& e) {
    throw IngestError(fields.string() + ": " + e.what());
  }
  std::vector<tabrec::TableRow> table_preds;
  const fs::path tables = pred / "tables.jsonl";
  if (fs::exists(tables)) {
    try {
      table_preds = tabrec::read_table_rows(read_file(tables.string()));
    } catch (const IngestError& e) {
      throw IngestError(tables.string() + ": " + e.what());
    }
  } else {
    err << "warning: " << tables.string() << " not found; every table counts as missing\n";
  }
  const auto report = evalkit::evaluate(gold, preds, table_preds);
  evalkit::print_report(out, report);
  if (!report_path.empty()) write_file(report_path, evalkit::report_to_json(report).dump(2) + "\n");
  return 0;
}

int cmd_gen(std::size_t n, std::uint64_t seed, double noise, const std::string& out_dir, std::ostream& out) {
  gen::gen_corpus({n, seed, noise}, out_dir);
  out << "wrote " << n << " documents to " << out_dir << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extraction toolkit for Key Information Documents"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--strict", g.strict, "fail on malformed inputs instead of skipping them");

  auto* annotate_cmd = app.add_subcommand("annotate", "extract text fields with a rule file");
  std::string rules, sections, in_dir, out_path, format;
  annotate_cmd->add_option("--rules", rules, "rule file (.tre); the bundled rules when omitted");
  annotate_cmd->add_option("--sections", sections, "section config JSON");
  annotate_cmd->add_option("--in", in_dir, "directory of .txt or page-text .json documents")->required();
  annotate_cmd->add_option("--out", out_path, "output file")->required();
  annotate_cmd->add_option("--format", format, "csv or jsonl (default: from the output extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  auto* tables_cmd = app.add_subcommand("tables", "rebuild tables from detection masks and OCR");
  std::string masks, pages, tables_out, tab_config, labels;
  tables_cmd->add_option("--masks", masks, "directory of page detection files")->required();
  tables_cmd->add_option("--pages", pages, "page-text file or directory")->required();
  tables_cmd->add_option("--out", tables_out, "tables JSONL output")->required();
  tables_cmd->add_option("--tab-config", tab_config, "table config JSON");
  tables_cmd->add_option("--labels", labels, "row labels config JSON");

  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold data");
  std::string gold_dir, pred_dir, report_path;
  eval_cmd->add_option("--gold", gold_dir, "gold directory (fields.jsonl, tables.jsonl)")->required();
  eval_cmd->add_option("--pred", pred_dir, "prediction directory (fields.jsonl or fields.csv, tables.jsonl)")
      ->required();
  eval_cmd->add_option("--report", report_path, "also write the report as JSON");

  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic corpus with gold data");
  std::size_t n = 1;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::string gen_out;
  gen_cmd->add_option("--n", n, "number of documents")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", seed, "random seed");
  gen_cmd->add_option("--noise", noise, "noise rate")->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--out", gen_out, "output directory")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*annotate_cmd) return cmd_annotate(g, rules, sections, in_dir, out_path, format, out, err);
    if (*tables_cmd) return cmd_tables(g, masks, pages, tables_out, tab_config, labels, out, err);
    if (*eval_cmd) return cmd_eval(g, gold_dir, pred_dir, report_path, out, err);
    if (*gen_cmd) return cmd_gen(n, seed, noise, gen_out, out);
  } catch (const RuleError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace kidex::pipeline
