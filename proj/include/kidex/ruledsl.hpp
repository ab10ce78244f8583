#pragma once

#include <cstddef>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace kidex::ruledsl {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Value side of an attribute constraint such as {word:$code}.
struct ConstraintValue {
  enum class Kind { literal, regex, binding };
  Kind kind = Kind::literal;
  std::string text;  // literal text, regex body, or binding name without '$'

  friend bool operator==(const ConstraintValue&, const ConstraintValue&) = default;
};

struct Constraint {
  std::string key;  // "word" tests token text; anything else an annotation key
  ConstraintValue value;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct Quantifier {
  static constexpr int kUnbounded = -1;
  int min = 1;
  int max = 1;
  bool lazy = false;

  friend bool operator==(const Quantifier&, const Quantifier&) = default;
};

/// Pattern AST node. Equality ignores source positions.
struct Pattern {
  enum class Kind {
    token_regex,  // text = regex body, matched against the whole token
    wildcard,     // "/*/": any token
    attr_set,     // constraints, all of which must hold
    var_ref,      // text = binding name
    named_group,  // text = group name, children[0] = body
    group,        // children[0] = body
    seq,          // children in order
    alt,          // children, first preferred
    quantified,   // children[0] repeated per quant
  };

  Kind kind = Kind::seq;
  std::string text;
  std::vector<Constraint> constraints;
  std::vector<Pattern> children;
  Quantifier quant;
  SourcePos pos;

  friend bool operator==(const Pattern& a, const Pattern& b);
};

struct Binding {
  std::string name;  // without '$'
  bool is_pattern = true;
  Pattern pattern;    // when is_pattern
  std::string value;  // string binding contents, unescaped
  SourcePos pos;

  /// A string binding written "/.../" denotes a character regex.
  bool is_regex_string() const;
  std::string regex_body() const;

  friend bool operator==(const Binding& a, const Binding& b);
};

struct AnnotateAction {
  std::string group;  // capture name without '$'; "0" denotes the whole match
  std::string key;
  bool captured_text = false;  // value is the CAPTURED_TEXT sentinel
  std::string value;
  SourcePos pos;

  bool whole_match() const { return group == "0"; }
  friend bool operator==(const AnnotateAction& a, const AnnotateAction& b);
};

struct Rule {
  Pattern pattern;
  std::vector<AnnotateAction> actions;
  int stage = 0;
  std::string rule_id;  // "<source>:<line>"
  SourcePos pos;

  /// rule_id is positional and excluded from equality.
  friend bool operator==(const Rule& a, const Rule& b);
};

struct RuleFile {
  std::vector<Binding> bindings;  // in definition order
  std::vector<Rule> rules;

  const Binding* find_binding(std::string_view name) const;
  friend bool operator==(const RuleFile&, const RuleFile&) = default;
};

/// Parses and validates a rule file. `source_name` prefixes rule ids and
/// diagnostics. Throws RuleError with line/column.
RuleFile parse_rules(std::string_view source, const std::string& source_name = "<rules>");
RuleFile load_rules(const std::string& path);

/// Canonical text form; parse(print(x)) is structurally equal to x.
std::string print(const RuleFile& file);
std::string print(const Pattern& pattern);

// ---------------------------------------------------------------------------
// Compiled form
// ---------------------------------------------------------------------------

/// A compiled token test. `word_tests` apply to the token text; every
/// annotation test requires some annotation with that key on the token whose
/// value satisfies the test.
struct ValueTest {
  bool is_regex = false;
  std::string literal;
  std::shared_ptr<const std::regex> regex;  // anchored at both ends
  int id = -1;                              // index for per-document caches

  bool operator()(const std::string& s) const;
};

struct TokenPredicate {
  bool any = false;
  std::vector<ValueTest> word_tests;
  std::vector<std::pair<std::string, ValueTest>> annotation_tests;
};

/// Pattern tree after inlining bindings and dropping plain groups.
struct Node {
  enum class Kind { pred, seq, alt, repeat, capture };
  Kind kind = Kind::seq;
  int pred = -1;  // index into CompiledRule::predicates
  int slot = -1;  // capture slot
  int min = 1;
  int max = 1;  // Quantifier::kUnbounded for no limit
  bool lazy = false;
  std::vector<Node> children;
};

struct CompiledRule {
  std::string rule_id;
  int stage = 0;
  Node root;
  std::vector<TokenPredicate> predicates;
  std::vector<std::string> slot_names;  // slot index -> group name
  std::vector<AnnotateAction> actions;
  int num_word_tests = 0;

  int slot_of(std::string_view group) const;
};

struct CompiledStage {
  int stage = 0;
  std::vector<CompiledRule> rules;  // rule file order
};

/// Immutable once built; safe to share between threads.
struct CompiledRules {
  std::vector<CompiledStage> stages;  // ascending stage number
};

/// Throws RuleError for an invalid character regex.
CompiledRules compile(const RuleFile& file, const std::string& source_name = "<rules>");

}  // namespace kidex::ruledsl
