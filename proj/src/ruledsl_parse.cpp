#include <cctype>
#include <map>
#include <set>

#include "kidex/core.hpp"
#include "kidex/error.hpp"
#include "kidex/ruledsl.hpp"

namespace kidex::ruledsl {

namespace {

enum class Tok { pname, ident, string, regex, integer, symbol, end };

struct Lexeme {
  Tok kind = Tok::end;
  std::string text;  // unescaped for strings, raw body for regexes
  SourcePos pos;
};

std::string describe(const Lexeme& t) {
  switch (t.kind) {
    case Tok::pname: return "'$" + t.text + "'";
    case Tok::ident: return "identifier '" + t.text + "'";
    case Tok::string: return "string \"" + t.text + "\"";
    case Tok::regex: return "token regex /" + t.text + "/";
    case Tok::integer: return "integer " + t.text;
    case Tok::symbol: return "'" + t.text + "'";
    case Tok::end: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  Lexer(std::string_view src, const std::string& name) : src_(src), name_(name) {}

  std::vector<Lexeme> run() {
    std::vector<Lexeme> out;
    for (;;) {
      skip_space_and_comments();
      Lexeme t;
      t.pos = pos();
      if (i_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[i_];
      if (c == '$') {
        advance();
        t.kind = Tok::pname;
        t.text = read_word();
        if (t.text.empty()) fail(t.pos, "expected a name after '$'");
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::ident;
        t.text = read_word();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::integer;
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
          t.text.push_back(src_[i_]);
          advance();
        }
      } else if (c == '"') {
        t.kind = Tok::string;
        t.text = read_string();
      } else if (c == '/') {
        t.kind = Tok::regex;
        t.text = read_regex();
      } else if (std::string_view("=()[]{}|&:,?*+").find(c) != std::string_view::npos) {
        t.kind = Tok::symbol;
        t.text = std::string(1, c);
        advance();
      } else {
        fail(t.pos, std::string("unexpected character '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

 private:
  SourcePos pos() const { return {line_, col_}; }

  [[noreturn]] void fail(SourcePos p, const std::string& msg) const {
    throw RuleError(name_, p.line, p.column, msg);
  }

  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[i_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++i_;
  }

  void skip_space_and_comments() {
    while (i_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[i_]))) {
        advance();
      } else if (src_.compare(i_, 2, "//") == 0) {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  std::string read_word() {
    std::string w;
    while (i_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
      w.push_back(src_[i_]);
      advance();
    }
    return w;
  }

  std::string read_string() {
    const SourcePos start = pos();
    advance();  // opening quote
    std::string s;
    while (i_ < src_.size() && src_[i_] != '"') {
      if (src_[i_] == '\n') fail(start, "unterminated string");
      if (src_[i_] == '\\' && i_ + 1 < src_.size()) {
        advance();
        const char e = src_[i_];
        if (e == 'n') {
          s.push_back('\n');
        } else if (e == 't') {
          s.push_back('\t');
        } else if (e == '"' || e == '\\') {
          s.push_back(e);
        } else {
          // Other escapes belong to the regex inside the string.
          s.push_back('\\');
          s.push_back(e);
        }
        advance();
        continue;
      }
      s.push_back(src_[i_]);
      advance();
    }
    if (i_ >= src_.size()) fail(start, "unterminated string");
    advance();
    return s;
  }

  std::string read_regex() {
    const SourcePos start = pos();
    advance();  // opening slash
    std::string body;
    while (i_ < src_.size() && src_[i_] != '/') {
      if (src_[i_] == '\n') fail(start, "unterminated token regex");
      if (src_[i_] == '\\' && i_ + 1 < src_.size()) {
        body.push_back(src_[i_]);
        advance();
      }
      body.push_back(src_[i_]);
      advance();
    }
    if (i_ >= src_.size()) fail(start, "unterminated token regex");
    advance();
    if (body.empty()) fail(start, "empty token regex");
    return body;
  }

  std::string_view src_;
  const std::string& name_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Lexeme> toks, const std::string& name) : toks_(std::move(toks)), name_(name) {}

  RuleFile run() {
    RuleFile file;
    while (peek().kind != Tok::end) {
      if (peek().kind == Tok::pname) {
        parse_binding(file);
      } else if (is_symbol("{")) {
        parse_rule(file);
      } else {
        unexpected({"'$name'", "'{'"});
      }
    }
    return file;
  }

 private:
  const Lexeme& peek(std::size_t ahead = 0) const {
    const std::size_t k = std::min(i_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Lexeme& next() {
    const Lexeme& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  bool is_symbol(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::symbol && peek(ahead).text == s;
  }

  [[noreturn]] void fail(SourcePos p, const std::string& msg) const {
    throw RuleError(name_, p.line, p.column, msg);
  }

  [[noreturn]] void unexpected(std::initializer_list<const char*> expected) const {
    std::string msg = "unexpected " + describe(peek()) + "; expected ";
    bool first = true;
    for (const char* e : expected) {
      if (!first) msg += " or ";
      msg += e;
      first = false;
    }
    fail(peek().pos, msg);
  }

  void expect_symbol(const char* s) {
    if (!is_symbol(s)) {
      const std::string quoted = std::string("'") + s + "'";
      unexpected({quoted.c_str()});
    }
    next();
  }

  void expect_ident(const char* word) {
    if (peek().kind != Tok::ident || peek().text != word) {
      const std::string quoted = std::string("'") + word + "'";
      unexpected({quoted.c_str()});
    }
    next();
  }

  void parse_binding(RuleFile& file) {
    const Lexeme name = next();
    if (defined_.count(name.text)) fail(name.pos, "duplicate binding $" + name.text);
    expect_symbol("=");
    Binding b;
    b.name = name.text;
    b.pos = name.pos;
    if (peek().kind == Tok::string) {
      b.is_pattern = false;
      b.value = next().text;
    } else if (is_symbol("(")) {
      next();
      b.pattern = parse_alt();
      expect_symbol(")");
      check_refs(b.pattern);
    } else {
      unexpected({"'('", "string"});
    }
    defined_[b.name] = b.is_pattern;
    file.bindings.push_back(std::move(b));
  }

  void parse_rule(RuleFile& file) {
    Rule r;
    r.pos = peek().pos;
    r.rule_id = name_ + ":" + std::to_string(r.pos.line);
    expect_symbol("{");
    expect_ident("ruleType");
    expect_symbol(":");
    if (peek().kind != Tok::string) unexpected({"string"});
    const Lexeme rt = next();
    if (rt.text != "tokens") fail(rt.pos, "unsupported ruleType \"" + rt.text + "\"; expected \"tokens\"");
    expect_symbol(",");
    expect_ident("pattern");
    expect_symbol(":");
    expect_symbol("(");
    r.pattern = parse_alt();
    expect_symbol(")");
    check_refs(r.pattern);
    expect_symbol(",");
    expect_ident("action");
    expect_symbol(":");
    expect_symbol("(");
    r.actions.push_back(parse_action());
    while (is_symbol(",")) {
      next();
      r.actions.push_back(parse_action());
    }
    expect_symbol(")");
    if (is_symbol(",")) {
      next();
      expect_ident("stage");
      expect_symbol(":");
      if (peek().kind != Tok::integer) unexpected({"integer"});
      r.stage = to_int(next());
    }
    expect_symbol("}");

    std::set<std::string> groups;
    collect_groups(r.pattern, file, groups);
    for (const AnnotateAction& a : r.actions) {
      if (!a.whole_match() && !groups.count(a.group)) {
        fail(a.pos, "action references unbound group $" + a.group);
      }
    }
    file.rules.push_back(std::move(r));
  }

  AnnotateAction parse_action() {
    AnnotateAction a;
    a.pos = peek().pos;
    expect_ident("Annotate");
    expect_symbol("(");
    if (peek().kind != Tok::pname) unexpected({"'$group'"});
    a.group = next().text;
    expect_symbol(",");
    if (peek().kind != Tok::ident) unexpected({"annotation key"});
    a.key = next().text;
    expect_symbol(",");
    if (peek().kind == Tok::string) {
      a.value = next().text;
    } else if (peek().kind == Tok::ident && peek().text == "CAPTURED_TEXT") {
      next();
      a.captured_text = true;
    } else {
      unexpected({"string", "'CAPTURED_TEXT'"});
    }
    expect_symbol(")");
    return a;
  }

  int to_int(const Lexeme& t) const {
    if (t.text.size() > 6) fail(t.pos, "integer too large");
    return std::stoi(t.text);
  }

  // alt := seq {"|" seq}
  Pattern parse_alt() {
    const SourcePos p = peek().pos;
    std::vector<Pattern> alts;
    alts.push_back(parse_seq());
    while (is_symbol("|")) {
      next();
      alts.push_back(parse_seq());
    }
    if (alts.size() == 1) return std::move(alts.front());
    Pattern a;
    a.kind = Pattern::Kind::alt;
    a.children = std::move(alts);
    a.pos = p;
    return a;
  }

  bool at_atom_start() const {
    const Lexeme& t = peek();
    return t.kind == Tok::regex || t.kind == Tok::pname ||
           (t.kind == Tok::symbol && (t.text == "[" || t.text == "("));
  }

  // seq := {quant}
  Pattern parse_seq() {
    const SourcePos p = peek().pos;
    std::vector<Pattern> items;
    while (at_atom_start()) items.push_back(parse_quant());
    if (items.size() == 1) return std::move(items.front());
    Pattern s;
    s.kind = Pattern::Kind::seq;
    s.children = std::move(items);
    s.pos = p;
    return s;
  }

  // quant := atom [("?"|"*"|"+"|"*?"|"+?"|"{"INT","INT"}")]
  Pattern parse_quant() {
    Pattern atom = parse_atom();
    Quantifier q;
    const SourcePos qpos = peek().pos;
    if (is_symbol("?")) {
      next();
      q = {0, 1, false};
    } else if (is_symbol("*") || is_symbol("+")) {
      q.min = next().text == "*" ? 0 : 1;
      q.max = Quantifier::kUnbounded;
      if (is_symbol("?")) {
        next();
        q.lazy = true;
      }
    } else if (is_symbol("{") && peek(1).kind == Tok::integer) {
      next();
      q.min = to_int(next());
      expect_symbol(",");
      if (peek().kind != Tok::integer) unexpected({"integer"});
      q.max = to_int(next());
      expect_symbol("}");
      if (q.min > q.max) fail(qpos, "quantifier lower bound exceeds upper bound");
    } else {
      return atom;
    }
    Pattern out;
    out.kind = Pattern::Kind::quantified;
    out.quant = q;
    out.pos = atom.pos;
    out.children.push_back(std::move(atom));
    return out;
  }

  Pattern parse_atom() {
    Pattern a;
    a.pos = peek().pos;
    if (peek().kind == Tok::regex) {
      const std::string body = next().text;
      if (body == "*") {
        a.kind = Pattern::Kind::wildcard;
      } else {
        a.kind = Pattern::Kind::token_regex;
        a.text = body;
      }
      return a;
    }
    if (peek().kind == Tok::pname) {
      a.kind = Pattern::Kind::var_ref;
      a.text = next().text;
      return a;
    }
    if (is_symbol("[")) {
      next();
      a.kind = Pattern::Kind::attr_set;
      a.constraints.push_back(parse_constraint());
      while (is_symbol("&")) {
        next();
        a.constraints.push_back(parse_constraint());
      }
      expect_symbol("]");
      return a;
    }
    expect_symbol("(");
    if (is_symbol("?") && peek(1).kind == Tok::pname) {
      next();
      a.kind = Pattern::Kind::named_group;
      a.text = next().text;
      a.children.push_back(parse_alt());
      expect_symbol(")");
      return a;
    }
    Pattern inner = parse_alt();
    expect_symbol(")");
    // Parentheses around a single element carry no meaning; keep a group
    // node only where they delimit a sequence or an alternation.
    if (inner.kind != Pattern::Kind::seq && inner.kind != Pattern::Kind::alt) return inner;
    a.kind = Pattern::Kind::group;
    a.children.push_back(std::move(inner));
    return a;
  }

  Constraint parse_constraint() {
    expect_symbol("{");
    if (peek().kind != Tok::ident) unexpected({"attribute name"});
    Constraint c;
    c.key = next().text;
    expect_symbol(":");
    const Lexeme& v = peek();
    if (v.kind == Tok::string) {
      c.value = {ConstraintValue::Kind::literal, next().text};
    } else if (v.kind == Tok::regex) {
      c.value = {ConstraintValue::Kind::regex, next().text};
    } else if (v.kind == Tok::pname) {
      const Lexeme ref = next();
      auto it = defined_.find(ref.text);
      if (it == defined_.end()) fail(ref.pos, "undefined binding $" + ref.text);
      if (it->second) fail(ref.pos, "binding $" + ref.text + " is a pattern; a string is required here");
      c.value = {ConstraintValue::Kind::binding, ref.text};
    } else {
      unexpected({"string", "token regex", "'$name'"});
    }
    expect_symbol("}");
    return c;
  }

  void check_refs(const Pattern& p) const {
    if (p.kind == Pattern::Kind::var_ref) {
      auto it = defined_.find(p.text);
      if (it == defined_.end()) fail(p.pos, "undefined binding $" + p.text);
      if (!it->second) fail(p.pos, "binding $" + p.text + " is a string; a pattern is required here");
    }
    for (const Pattern& c : p.children) check_refs(c);
  }

  void collect_groups(const Pattern& p, const RuleFile& file, std::set<std::string>& out) const {
    if (p.kind == Pattern::Kind::named_group) out.insert(p.text);
    if (p.kind == Pattern::Kind::var_ref) {
      if (const Binding* b = file.find_binding(p.text); b && b->is_pattern) {
        collect_groups(b->pattern, file, out);
      }
    }
    for (const Pattern& c : p.children) collect_groups(c, file, out);
  }

  std::vector<Lexeme> toks_;
  const std::string& name_;
  std::size_t i_ = 0;
  std::map<std::string, bool> defined_;  // name -> is_pattern
};

}  // namespace

RuleFile parse_rules(std::string_view source, const std::string& source_name) {
  Lexer lexer(source, source_name);
  Parser parser(lexer.run(), source_name);
  return parser.run();
}

RuleFile load_rules(const std::string& path) { return parse_rules(read_file(path), path); }

const Binding* RuleFile::find_binding(std::string_view name) const {
  for (const Binding& b : bindings) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

bool Binding::is_regex_string() const {
  return !is_pattern && value.size() >= 2 && value.front() == '/' && value.back() == '/';
}

std::string Binding::regex_body() const { return value.substr(1, value.size() - 2); }

bool operator==(const Pattern& a, const Pattern& b) {
  return a.kind == b.kind && a.text == b.text && a.constraints == b.constraints &&
         a.children == b.children && a.quant == b.quant;
}

bool operator==(const Binding& a, const Binding& b) {
  return a.name == b.name && a.is_pattern == b.is_pattern && a.pattern == b.pattern &&
         a.value == b.value;
}

bool operator==(const AnnotateAction& a, const AnnotateAction& b) {
  return a.group == b.group && a.key == b.key && a.captured_text == b.captured_text &&
         a.value == b.value;
}

bool operator==(const Rule& a, const Rule& b) {
  return a.pattern == b.pattern && a.actions == b.actions && a.stage == b.stage;
}

}  // namespace kidex::ruledsl
