#include <algorithm>
#include <map>

#include "kidex/error.hpp"
#include "kidex/ruledsl.hpp"

namespace kidex::ruledsl {

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string print_value(const ConstraintValue& v) {
  switch (v.kind) {
    case ConstraintValue::Kind::literal: return quote(v.text);
    case ConstraintValue::Kind::regex: return "/" + v.text + "/";
    case ConstraintValue::Kind::binding: return "$" + v.text;
  }
  return {};
}

std::string quant_suffix(const Quantifier& q) {
  if (q.max == Quantifier::kUnbounded) {
    // The grammar only yields unbounded repeats from '*' and '+'.
    std::string s = q.min == 0 ? "*" : "+";
    return q.lazy ? s + "?" : s;
  }
  if (q.min == 0 && q.max == 1 && !q.lazy) return "?";
  return "{" + std::to_string(q.min) + "," + std::to_string(q.max) + "}";
}

}  // namespace

std::string print(const Pattern& p) {
  using K = Pattern::Kind;
  switch (p.kind) {
    case K::token_regex: return "/" + p.text + "/";
    case K::wildcard: return "/*/";
    case K::attr_set: {
      std::string s = "[";
      for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        if (i) s += " & ";
        s += "{" + p.constraints[i].key + ":" + print_value(p.constraints[i].value) + "}";
      }
      return s + "]";
    }
    case K::var_ref: return "$" + p.text;
    case K::named_group: return "(?$" + p.text + " " + print(p.children[0]) + ")";
    case K::group: return "(" + print(p.children[0]) + ")";
    case K::seq: {
      std::string s;
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        if (i) s += " ";
        s += print(p.children[i]);
      }
      return s;
    }
    case K::alt: {
      std::string s;
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        if (i) s += p.children[i].kind == K::seq && p.children[i].children.empty() ? " |" : " | ";
        s += print(p.children[i]);
      }
      return s;
    }
    case K::quantified: {
      const Pattern& c = p.children[0];
      std::string inner = print(c);
      if (c.kind == K::quantified || c.kind == K::seq || c.kind == K::alt) inner = "(" + inner + ")";
      return inner + quant_suffix(p.quant);
    }
  }
  return {};
}

std::string print(const RuleFile& file) {
  std::string out;
  for (const Binding& b : file.bindings) {
    out += "$" + b.name + " = ";
    out += b.is_pattern ? "(" + print(b.pattern) + ")" : quote(b.value);
    out += "\n";
  }
  for (const Rule& r : file.rules) {
    out += "{\n  ruleType: \"tokens\",\n  pattern: (" + print(r.pattern) + "),\n  action: (";
    for (std::size_t i = 0; i < r.actions.size(); ++i) {
      const AnnotateAction& a = r.actions[i];
      if (i) out += ", ";
      out += "Annotate($" + a.group + ", " + a.key + ", " +
             (a.captured_text ? std::string("CAPTURED_TEXT") : quote(a.value)) + ")";
    }
    out += ")";
    if (r.stage != 0) out += ",\n  stage: " + std::to_string(r.stage);
    out += "\n}\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

bool ValueTest::operator()(const std::string& s) const {
  if (!is_regex) return s == literal;
  return std::regex_match(s, *regex);
}

int CompiledRule::slot_of(std::string_view group) const {
  for (std::size_t i = 0; i < slot_names.size(); ++i) {
    if (slot_names[i] == group) return static_cast<int>(i);
  }
  return -1;
}

namespace {

class RuleCompiler {
 public:
  RuleCompiler(const RuleFile& file, const std::string& source_name)
      : file_(file), source_name_(source_name) {}

  CompiledRule run(const Rule& rule) {
    out_ = CompiledRule{};
    out_.rule_id = rule.rule_id;
    out_.stage = rule.stage;
    out_.actions = rule.actions;
    out_.root = expand(rule.pattern);
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(SourcePos p, const std::string& msg) const {
    throw RuleError(source_name_, p.line, p.column, msg);
  }

  ValueTest make_regex_test(const std::string& body, SourcePos pos) {
    ValueTest t;
    t.is_regex = true;
    t.literal = body;
    try {
      t.regex = std::make_shared<const std::regex>("(?:" + body + ")", std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      fail(pos, "invalid token regex /" + body + "/: " + e.what());
    }
    return t;
  }

  ValueTest make_value_test(const ConstraintValue& v, SourcePos pos) {
    switch (v.kind) {
      case ConstraintValue::Kind::literal: {
        ValueTest t;
        t.literal = v.text;
        return t;
      }
      case ConstraintValue::Kind::regex: return make_regex_test(v.text, pos);
      case ConstraintValue::Kind::binding: {
        const Binding* b = file_.find_binding(v.text);
        if (!b || b->is_pattern) fail(pos, "binding $" + v.text + " is not a string");
        if (b->is_regex_string()) return make_regex_test(b->regex_body(), pos);
        ValueTest t;
        t.literal = b->value;
        return t;
      }
    }
    fail(pos, "bad constraint value");
  }

  Node pred_node(TokenPredicate pred) {
    for (ValueTest& t : pred.word_tests) t.id = out_.num_word_tests++;
    Node n;
    n.kind = Node::Kind::pred;
    n.pred = static_cast<int>(out_.predicates.size());
    out_.predicates.push_back(std::move(pred));
    return n;
  }

  Node expand(const Pattern& p) {
    using K = Pattern::Kind;
    switch (p.kind) {
      case K::token_regex: {
        TokenPredicate pred;
        pred.word_tests.push_back(make_regex_test(p.text, p.pos));
        return pred_node(std::move(pred));
      }
      case K::wildcard: {
        TokenPredicate pred;
        pred.any = true;
        return pred_node(std::move(pred));
      }
      case K::attr_set: {
        TokenPredicate pred;
        for (const Constraint& c : p.constraints) {
          ValueTest t = make_value_test(c.value, p.pos);
          if (c.key == "word") {
            pred.word_tests.push_back(std::move(t));
          } else {
            pred.annotation_tests.emplace_back(c.key, std::move(t));
          }
        }
        return pred_node(std::move(pred));
      }
      case K::var_ref: {
        const Binding* b = file_.find_binding(p.text);
        if (!b || !b->is_pattern) fail(p.pos, "undefined pattern binding $" + p.text);
        return expand(b->pattern);
      }
      case K::named_group: {
        Node n;
        n.kind = Node::Kind::capture;
        n.slot = slot(p.text);
        n.children.push_back(expand(p.children[0]));
        return n;
      }
      case K::group: return expand(p.children[0]);
      case K::seq:
      case K::alt: {
        Node n;
        n.kind = p.kind == K::seq ? Node::Kind::seq : Node::Kind::alt;
        for (const Pattern& c : p.children) n.children.push_back(expand(c));
        return n;
      }
      case K::quantified: {
        Node n;
        n.kind = Node::Kind::repeat;
        n.min = p.quant.min;
        n.max = p.quant.max;
        n.lazy = p.quant.lazy;
        n.children.push_back(expand(p.children[0]));
        return n;
      }
    }
    fail(p.pos, "bad pattern node");
  }

  int slot(const std::string& name) {
    const int existing = out_.slot_of(name);
    if (existing >= 0) return existing;
    out_.slot_names.push_back(name);
    return static_cast<int>(out_.slot_names.size()) - 1;
  }

  const RuleFile& file_;
  const std::string& source_name_;
  CompiledRule out_;
};

}  // namespace

CompiledRules compile(const RuleFile& file, const std::string& source_name) {
  RuleCompiler compiler(file, source_name);
  std::map<int, CompiledStage> stages;
  for (const Rule& r : file.rules) {
    CompiledStage& st = stages[r.stage];
    st.stage = r.stage;
    st.rules.push_back(compiler.run(r));
  }
  CompiledRules out;
  for (auto& [n, st] : stages) out.stages.push_back(std::move(st));
  return out;
}

}  // namespace kidex::ruledsl
