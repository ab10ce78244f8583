#pragma once

#include <string_view>

namespace kidex {

/// The bundled ruleset (data/default.tre), compiled into the library.
std::string_view default_rules_text();

inline constexpr std::string_view kDefaultRulesName = "default.tre";

}  // namespace kidex
