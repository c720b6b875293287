#pragma once

#include <stdexcept>
#include <string>

namespace viewcap {

struct InfeasibleAction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConstructionFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownWord : std::runtime_error {
  explicit UnknownWord(const std::string& word)
      : std::runtime_error("unknown word: " + word) {}
};

struct NotVisible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateScene : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyMask : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorpusTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by loaders; `where` is a field path like "objects[2].footprint[0]".
struct ParseError : std::runtime_error {
  ParseError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), field(where) {}
  std::string field;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace viewcap
