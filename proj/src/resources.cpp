#include "kidex/resources.hpp"

namespace kidex {

std::string_view default_rules_text() {
  static constexpr std::string_view kText =
#include "kidex_default_rules.inc"
      ;
  return kText;
}

}  // namespace kidex
