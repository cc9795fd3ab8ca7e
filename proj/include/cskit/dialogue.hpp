#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cskit {

struct Turn {
  std::string speaker;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::string id;
  std::optional<std::string> context;
  std::vector<Turn> turns;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

}  // namespace cskit
