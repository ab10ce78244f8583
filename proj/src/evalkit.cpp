#include "kidex/evalkit.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "kidex/error.hpp"
#include "kidex/text_util.hpp"

namespace kidex::evalkit {

namespace {

std::string get_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw IngestError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw IngestError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

using TableKey = std::pair<std::string, TableType>;

}  // namespace

std::vector<GoldField> read_gold_fields(std::string_view jsonl) {
  std::vector<GoldField> out;
  std::set<GoldField> seen;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    GoldField g;
    try {
      const Json j = Json::parse(line);
      if (!j.is_object()) throw IngestError("expected a JSON object");
      g = {get_string(j, "doc_id"), get_string(j, "field"), get_string(j, "value")};
    } catch (const Json::exception& e) {
      throw IngestError(where + "malformed JSON: " + e.what());
    } catch (const IngestError& e) {
      throw IngestError(where + e.what());
    }
    if (!seen.insert(g).second) {
      throw IngestError(where + "duplicate gold entry (" + g.doc_id + ", " + g.field + ", " + g.value + ")");
    }
    out.push_back(std::move(g));
  }
  return out;
}

void write_gold_fields(std::ostream& out, const std::vector<GoldField>& fields) {
  for (const auto& g : fields) {
    OrderedJson j;
    j["doc_id"] = g.doc_id;
    j["field"] = g.field;
    j["value"] = g.value;
    out << j.dump() << '\n';
  }
}

GoldSet load_gold(const std::string& dir) {
  namespace fs = std::filesystem;
  GoldSet gold;
  const std::string fields = (fs::path(dir) / "fields.jsonl").string();
  const std::string tables = (fs::path(dir) / "tables.jsonl").string();
  try {
    gold.fields = read_gold_fields(read_file(fields));
  } catch (const IngestError& e) {
    throw IngestError(fields + ": " + e.what());
  }
  try {
    gold.tables = tabrec::read_table_rows(read_file(tables));
  } catch (const IngestError& e) {
    throw IngestError(tables + ": " + e.what());
  }
  return gold;
}

double precision(std::size_t tp, std::size_t fp) {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall(std::size_t tp, std::size_t fn) {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double f_measure(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double FieldScore::precision() const { return evalkit::precision(tp, fp); }
double FieldScore::recall() const { return evalkit::recall(tp, fn); }
double FieldScore::f_measure() const { return evalkit::f_measure(precision(), recall()); }

EvalReport evaluate(const GoldSet& gold, const std::vector<matcher::ExtractionResult>& predictions,
                    const std::vector<tabrec::TableRow>& table_predictions) {
  EvalReport report;
  std::set<GoldField> gold_set;
  std::set<std::string> docs;
  for (const auto& g : gold.fields) {
    gold_set.insert({g.doc_id, g.field, text::collapse_spaces(g.value)});
    docs.insert(g.doc_id);
  }
  std::set<GoldField> pred_set;
  for (const auto& p : predictions) pred_set.insert({p.doc_id, p.field, text::collapse_spaces(p.value)});

  for (const auto& p : pred_set) {
    auto& s = report.fields[p.field];
    if (gold_set.count(p)) {
      ++s.tp;
    } else {
      ++s.fp;
    }
  }
  for (const auto& g : gold_set) {
    auto& s = report.fields[g.field];
    if (!pred_set.count(g)) ++s.fn;
  }
  for (const auto& [name, s] : report.fields) {
    report.micro.tp += s.tp;
    report.micro.fp += s.fp;
    report.micro.fn += s.fn;
  }

  // Document level.
  std::set<std::pair<std::string, std::string>> predicted_fields;
  for (const auto& p : pred_set) predicted_fields.insert({p.doc_id, p.field});
  std::set<std::string> missing_docs, wrong_docs;
  for (const auto& g : gold_set) {
    if (pred_set.count(g)) continue;
    if (predicted_fields.count({g.doc_id, g.field})) {
      wrong_docs.insert(g.doc_id);
    } else {
      missing_docs.insert(g.doc_id);
    }
  }
  for (const auto& p : pred_set) {
    if (docs.count(p.doc_id) && !gold_set.count(p)) wrong_docs.insert(p.doc_id);
  }

  // Tables.
  std::map<TableKey, const tabrec::TableRow*> pred_tables;
  for (const auto& r : table_predictions) pred_tables.emplace(TableKey{r.doc_id, r.type}, &r);
  for (TableType t : kAllTableTypes) report.tables[t];
  for (const auto& g : gold.tables) {
    docs.insert(g.doc_id);
    auto& s = report.tables[g.type];
    auto it = pred_tables.find({g.doc_id, g.type});
    const bool pred_extracted = it != pred_tables.end() && it->second->extracted;
    if (!g.extracted) {
      if (pred_extracted) ++s.spurious;
      continue;
    }
    ++s.gold;
    if (!pred_extracted) {
      ++s.missing;
    } else if (it->second->record == g.record) {
      ++s.extracted;
    } else {
      ++s.incorrect;
    }
  }

  report.documents.documents = docs.size();
  for (const auto& d : docs) {
    if (!missing_docs.count(d) && !wrong_docs.count(d)) ++report.documents.complete;
  }
  report.documents.with_missing_field = missing_docs.size();
  report.documents.with_wrong_value = wrong_docs.size();
  return report;
}

void print_table_summary(std::ostream& out, const std::map<TableType, TableScore>& tables) {
  constexpr int kLabel = 12;
  constexpr int kCol = 24;
  out << std::left << std::setw(kLabel) << "";
  for (const auto& [t, s] : tables) out << std::setw(kCol) << to_string(t);
  out << '\n';
  bool any_incorrect = false;
  for (const auto& [t, s] : tables) any_incorrect |= s.incorrect > 0;
  auto line = [&](const char* name, std::size_t TableScore::*member) {
    out << std::setw(kLabel) << name;
    for (const auto& [t, s] : tables) out << std::setw(kCol) << s.*member;
    out << '\n';
  };
  line("Extracted", &TableScore::extracted);
  if (any_incorrect) line("Incorrect", &TableScore::incorrect);
  line("Missing", &TableScore::missing);
  out << std::right;
}

void print_report(std::ostream& out, const EvalReport& report) {
  out << std::left << std::setw(24) << "field" << std::right << std::setw(7) << "tp" << std::setw(7)
      << "fp" << std::setw(7) << "fn" << std::setw(11) << "precision" << std::setw(9) << "recall"
      << std::setw(11) << "f_measure" << '\n';
  auto row = [&](const std::string& name, const FieldScore& s) {
    out << std::left << std::setw(24) << name << std::right << std::setw(7) << s.tp << std::setw(7) << s.fp
        << std::setw(7) << s.fn << std::setw(11) << fmt(s.precision()) << std::setw(9)
        << fmt(s.recall()) << std::setw(11) << fmt(s.f_measure()) << '\n';
  };
  for (const auto& [name, s] : report.fields) row(name, s);
  row("ALL (micro)", report.micro);
  out << '\n';
  out << "documents " << report.documents.documents << ", complete " << report.documents.complete
      << ", with missing field " << report.documents.with_missing_field << ", with wrong value "
      << report.documents.with_wrong_value << "\n\n";
  print_table_summary(out, report.tables);
}

OrderedJson report_to_json(const EvalReport& report) {
  auto score = [](const FieldScore& s) {
    OrderedJson j;
    j["tp"] = s.tp;
    j["fp"] = s.fp;
    j["fn"] = s.fn;
    j["precision"] = s.precision();
    j["recall"] = s.recall();
    j["f_measure"] = s.f_measure();
    return j;
  };
  OrderedJson j;
  OrderedJson fields = OrderedJson::object();
  for (const auto& [name, s] : report.fields) fields[name] = score(s);
  j["fields"] = fields;
  j["micro"] = score(report.micro);
  OrderedJson tables = OrderedJson::object();
  for (const auto& [t, s] : report.tables) {
    OrderedJson tj;
    tj["gold"] = s.gold;
    tj["extracted"] = s.extracted;
    tj["incorrect"] = s.incorrect;
    tj["missing"] = s.missing;
    tj["spurious"] = s.spurious;
    tables[std::string(to_string(t))] = tj;
  }
  j["tables"] = tables;
  OrderedJson docs;
  docs["documents"] = report.documents.documents;
  docs["complete"] = report.documents.complete;
  docs["with_missing_field"] = report.documents.with_missing_field;
  docs["with_wrong_value"] = report.documents.with_wrong_value;
  j["documents"] = docs;
  return j;
}

}  // namespace kidex::evalkit
