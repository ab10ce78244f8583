#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "kidex/annotate.hpp"
#include "kidex/error.hpp"
#include "kidex/evalkit.hpp"
#include "kidex/normalize.hpp"
#include "kidex/pipeline.hpp"
#include "kidex/resources.hpp"
#include "kidex/ruledsl.hpp"
#include "kidex/textprep.hpp"

namespace py = pybind11;
using namespace kidex;

namespace {

normalize::LocaleHint locale_of(const std::string& name) {
  if (name == "it") return normalize::LocaleHint::it;
  if (name == "en") return normalize::LocaleHint::en;
  throw py::value_error("locale must be 'it' or 'en'");
}

ruledsl::CompiledRules compile_source(const std::optional<std::string>& source) {
  if (!source) return ruledsl::compile(ruledsl::parse_rules(default_rules_text(), "default.tre"), "default.tre");
  return ruledsl::compile(ruledsl::parse_rules(*source, "<rules>"), "<rules>");
}

}  // namespace

PYBIND11_MODULE(_kidex, m) {
  m.doc() = "Rule-based field and table extraction for key information documents";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<IngestError>(m, "IngestError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<RuleError>(m, "RuleError", base.ptr());

  m.def(
      "normalize_number",
      [](const std::string& text, const std::string& locale) -> std::optional<std::string> {
        const auto v = normalize::normalize_number(text, locale_of(locale));
        if (!v) return std::nullopt;
        return v->to_string();
      },
      py::arg("text"), py::arg("locale") = "it", "Canonical decimal string, or None if the text is not a number.");
  m.def("normalize_label", [](const std::string& text) { return normalize::normalize_label(text); });
  m.def("fix_confusions", [](const std::string& text) { return normalize::fix_confusions(text); });
  m.def("f_measure", &evalkit::f_measure, py::arg("precision"), py::arg("recall"));

  m.def(
      "check_rules",
      [](const std::string& source) {
        std::size_t n = 0;
        for (const auto& stage : compile_source(source).stages) n += stage.rules.size();
        return n;
      },
      py::arg("source"), "Number of rules; raises RuleError on a bad ruleset.");

  m.def(
      "extract",
      [](const std::string& text, const std::optional<std::string>& rules, const std::string& doc_id) {
        const auto compiled = compile_source(rules);
        const auto results = pipeline::extract_document(textprep::document_from_text(doc_id, text), compiled,
                                                        annotate::default_section_config());
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["doc_id"] = r.doc_id;
          d["field"] = r.field;
          d["value"] = r.value;
          d["tag"] = r.tag;
          d["first_token"] = r.first_token;
          d["last_token"] = r.last_token;
          d["rule_id"] = r.rule_id;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), py::arg("rules") = py::none(), py::arg("doc_id") = "doc");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = pipeline::run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Returns (exit code, stdout, stderr).");
}
