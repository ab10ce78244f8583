#include "kidex/matcher.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <type_traits>

#include "kidex/error.hpp"

namespace kidex::matcher {

namespace {

using ruledsl::CompiledRule;
using ruledsl::Node;
using ruledsl::TokenPredicate;

/// Non-owning reference to a callable; continuations live on the stack of
/// the frame that creates them, which always outlives the call.
template <typename Sig>
class FunctionRef;

template <typename R, typename... Args>
class FunctionRef<R(Args...)> {
 public:
  template <typename F, typename = std::enable_if_t<!std::is_same_v<std::decay_t<F>, FunctionRef>>>
  FunctionRef(F&& f)  // NOLINT(google-explicit-constructor)
      : obj_(const_cast<void*>(static_cast<const void*>(&f))),
        call_([](void* o, Args... args) -> R {
          return (*static_cast<std::remove_reference_t<F>*>(o))(std::forward<Args>(args)...);
        }) {}

  R operator()(Args... args) const { return call_(obj_, std::forward<Args>(args)...); }

 private:
  void* obj_;
  R (*call_)(void*, Args...);
};

using Cont = FunctionRef<bool(std::size_t)>;

/// Annotations by token, kept current while rules add new ones.
class AnnotationIndex {
 public:
  explicit AnnotationIndex(const Document& doc) : by_token_(doc.tokens.size()) {
    for (std::size_t i = 0; i < doc.annotations.size(); ++i) add(doc.annotations[i], i);
  }

  void add(const Annotation& a, std::size_t index) {
    for (std::size_t t = a.first; t <= a.last && t < by_token_.size(); ++t) {
      by_token_[t].push_back(index);
    }
  }

  const std::vector<std::size_t>& at(std::size_t token) const { return by_token_[token]; }

 private:
  std::vector<std::vector<std::size_t>> by_token_;
};

class Engine {
 public:
  Engine(const CompiledRule& rule, const Document& doc, const AnnotationIndex& index,
         std::size_t step_limit)
      : rule_(rule),
        doc_(doc),
        index_(index),
        step_limit_(step_limit),
        word_cache_(static_cast<std::size_t>(rule.num_word_tests) * doc.tokens.size(), -1) {}

  std::optional<Match> find(std::size_t start) {
    const std::size_t n = doc_.tokens.size();
    for (std::size_t s = start; s < n; ++s) {
      steps_ = 0;
      caps_.assign(rule_.slot_names.size(), std::nullopt);
      std::size_t end = s;
      auto accept = [&](std::size_t p) {
        if (p == s) return false;
        end = p;
        return true;
      };
      if (match(rule_.root, s, accept)) {
        Match m;
        m.rule_id = rule_.rule_id;
        m.span = Span{s, end};
        for (std::size_t k = 0; k < caps_.size(); ++k) {
          if (caps_[k]) m.captures[rule_.slot_names[k]] = *caps_[k];
        }
        return m;
      }
    }
    return std::nullopt;
  }

 private:
  bool test(const TokenPredicate& pred, std::size_t pos) {
    if (pred.any) return true;
    const std::size_t n = doc_.tokens.size();
    for (const auto& t : pred.word_tests) {
      std::int8_t& cached = word_cache_[static_cast<std::size_t>(t.id) * n + pos];
      if (cached < 0) cached = t(doc_.tokens[pos].text) ? 1 : 0;
      if (!cached) return false;
    }
    for (const auto& [key, t] : pred.annotation_tests) {
      bool found = false;
      for (std::size_t ai : index_.at(pos)) {
        const Annotation& a = doc_.annotations[ai];
        if (a.key == key && t(a.value)) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }

  bool match(const Node& node, std::size_t pos, Cont k) {
    if (++steps_ > step_limit_) throw RuleComplexityError(rule_.rule_id);
    switch (node.kind) {
      case Node::Kind::pred:
        if (pos < doc_.tokens.size() && test(rule_.predicates[node.pred], pos)) return k(pos + 1);
        return false;
      case Node::Kind::seq: return match_seq(node, 0, pos, k);
      case Node::Kind::alt:
        for (const Node& c : node.children) {
          if (match(c, pos, k)) return true;
        }
        return false;
      case Node::Kind::capture: {
        auto inner = [&](std::size_t p) {
          const std::optional<Span> saved = caps_[node.slot];
          caps_[node.slot] = Span{pos, p};
          if (k(p)) return true;
          caps_[node.slot] = saved;
          return false;
        };
        return match(node.children[0], pos, inner);
      }
      case Node::Kind::repeat: return match_repeat(node, 0, pos, k);
    }
    return false;
  }

  bool match_seq(const Node& node, std::size_t i, std::size_t pos, Cont k) {
    if (i == node.children.size()) return k(pos);
    auto rest = [&](std::size_t p) { return match_seq(node, i + 1, p, k); };
    return match(node.children[i], pos, rest);
  }

  bool match_repeat(const Node& node, int count, std::size_t pos, Cont k) {
    const bool can_stop = count >= node.min;
    auto one_more = [&]() {
      if (node.max != ruledsl::Quantifier::kUnbounded && count >= node.max) return false;
      auto after = [&](std::size_t p) {
        if (can_stop && p == pos) return false;  // empty optional iteration
        return match_repeat(node, count + 1, p, k);
      };
      return match(node.children[0], pos, after);
    };
    if (node.lazy) {
      if (can_stop && k(pos)) return true;
      return one_more();
    }
    if (one_more()) return true;
    return can_stop && k(pos);
  }

  const CompiledRule& rule_;
  const Document& doc_;
  const AnnotationIndex& index_;
  std::size_t step_limit_;
  std::size_t steps_ = 0;
  std::vector<std::optional<Span>> caps_;
  std::vector<std::int8_t> word_cache_;
};

std::string join_tokens(const Document& doc, Span span) {
  std::string out;
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (i > span.begin) out.push_back(' ');
    out += doc.tokens[i].text;
  }
  return out;
}

}  // namespace

std::optional<Match> find_match(const CompiledRule& rule, const Document& doc, std::size_t start,
                                std::size_t step_limit) {
  AnnotationIndex index(doc);
  Engine engine(rule, doc, index, step_limit);
  return engine.find(start);
}

RunOutput run_rules(const ruledsl::CompiledRules& rules, Document doc, std::size_t step_limit) {
  RunOutput out;
  AnnotationIndex index(doc);
  std::set<std::tuple<std::string, std::size_t, std::size_t>> seen;
  for (const auto& stage : rules.stages) {
    for (const CompiledRule& rule : stage.rules) {
      Engine engine(rule, doc, index, step_limit);
      std::size_t pos = 0;
      while (pos < doc.tokens.size()) {
        std::optional<Match> m = engine.find(pos);
        if (!m) break;
        for (const ruledsl::AnnotateAction& action : rule.actions) {
          Span span = m->span;
          if (!action.whole_match()) {
            auto it = m->captures.find(action.group);
            if (it == m->captures.end()) continue;
            span = it->second;
          }
          if (span.empty()) continue;
          if (!seen.emplace(action.key, span.begin, span.end - 1).second) continue;
          const std::string text = join_tokens(doc, span);
          const std::string tag = action.captured_text ? text : action.value;
          doc.annotations.push_back(Annotation{action.key, tag, span.begin, span.end - 1, rule.rule_id});
          index.add(doc.annotations.back(), doc.annotations.size() - 1);
          out.results.push_back(ExtractionResult{doc.doc_id, action.key, text, tag, span.begin,
                                                 span.end - 1, rule.rule_id});
        }
        pos = m->span.end;
      }
    }
  }
  out.doc = std::move(doc);
  return out;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

constexpr const char* kColumns[] = {"doc_id",     "field",     "value",  "tag",
                                    "first_token", "last_token", "rule_id"};

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
      }
      cell.clear();
      row.clear();
      any = false;
    } else {
      cell.push_back(c);
      any = true;
    }
  }
  if (quoted) throw IngestError("unterminated quoted CSV field");
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t to_index(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw IngestError(std::string("field '") + what + "' must be a non-negative integer");
  }
  return std::stoull(s);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ExtractionResult>& results) {
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
  out << "\r\n";
  for (const ExtractionResult& r : results) {
    out << csv_field(r.doc_id) << ',' << csv_field(r.field) << ',' << csv_field(r.value) << ','
        << csv_field(r.tag) << ',' << r.first_token << ',' << r.last_token << ','
        << csv_field(r.rule_id) << "\r\n";
  }
}

void write_jsonl(std::ostream& out, const std::vector<ExtractionResult>& results) {
  for (const ExtractionResult& r : results) {
    nlohmann::ordered_json j;
    j["doc_id"] = r.doc_id;
    j["field"] = r.field;
    j["value"] = r.value;
    j["tag"] = r.tag;
    j["first_token"] = r.first_token;
    j["last_token"] = r.last_token;
    j["rule_id"] = r.rule_id;
    out << j.dump() << '\n';
  }
}

void export_results(const std::vector<ExtractionResult>& results, ExportFormat format,
                    const std::string& path) {
  std::ostringstream out;
  if (format == ExportFormat::csv) {
    write_csv(out, results);
  } else {
    write_jsonl(out, results);
  }
  write_file(path, out.str());
}

std::vector<ExtractionResult> read_results_jsonl(std::string_view text) {
  std::vector<ExtractionResult> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const Json j = Json::parse(line);
      ExtractionResult r;
      r.doc_id = j.at("doc_id").get<std::string>();
      r.field = j.at("field").get<std::string>();
      r.value = j.at("value").get<std::string>();
      r.tag = j.value("tag", std::string());
      r.first_token = j.value("first_token", std::size_t{0});
      r.last_token = j.value("last_token", std::size_t{0});
      r.rule_id = j.value("rule_id", std::string());
      out.push_back(std::move(r));
    } catch (const Json::exception& e) {
      throw IngestError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ExtractionResult> read_results_csv(std::string_view text) {
  auto rows = parse_csv(text);
  std::vector<ExtractionResult> out;
  if (rows.empty()) return out;
  const auto& header = rows.front();
  if (header.size() != std::size(kColumns) ||
      !std::equal(header.begin(), header.end(), std::begin(kColumns))) {
    throw IngestError("unexpected CSV header");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != std::size(kColumns)) {
      throw IngestError("CSV row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) +
                        " columns");
    }
    out.push_back(ExtractionResult{r[0], r[1], r[2], r[3], to_index(r[4], "first_token"),
                                   to_index(r[5], "last_token"), r[6]});
  }
  return out;
}

void sort_results(std::vector<ExtractionResult>& results) {
  std::stable_sort(results.begin(), results.end(),
                   [](const ExtractionResult& a, const ExtractionResult& b) {
                     return std::tie(a.doc_id, a.field, a.first_token, a.last_token, a.value,
                                     a.rule_id) < std::tie(b.doc_id, b.field, b.first_token,
                                                           b.last_token, b.value, b.rule_id);
                   });
}

}  // namespace kidex::matcher
