#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <system_error>

namespace pqa {

enum class Err {
  DegenerateAngle,
  OutOfRange,
  ArityMismatch,
  UnsupportedPair,
  IncompatibleQuantity,
  SpecInvalid,
  Unsatisfiable,
  PixelBudgetViolation,
  SchemaViolation,
  ElementMissing,
  InsufficientSamples,
  CorruptDataset,
  GoldMismatch,
  MissingResponse,
  JudgeUnavailable,
  IoError,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::DegenerateAngle: return "DegenerateAngle";
    case Err::OutOfRange: return "OutOfRange";
    case Err::ArityMismatch: return "ArityMismatch";
    case Err::UnsupportedPair: return "UnsupportedPair";
    case Err::IncompatibleQuantity: return "IncompatibleQuantity";
    case Err::SpecInvalid: return "SpecInvalid";
    case Err::Unsatisfiable: return "Unsatisfiable";
    case Err::PixelBudgetViolation: return "PixelBudgetViolation";
    case Err::SchemaViolation: return "SchemaViolation";
    case Err::ElementMissing: return "ElementMissing";
    case Err::InsufficientSamples: return "InsufficientSamples";
    case Err::CorruptDataset: return "CorruptDataset";
    case Err::GoldMismatch: return "GoldMismatch";
    case Err::MissingResponse: return "MissingResponse";
    case Err::JudgeUnavailable: return "JudgeUnavailable";
    case Err::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

// Shortest decimal form that parses back to the same double. Keeps emitted
// SVG/JSON byte-stable across runs and platforms.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string lower_copy(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

inline std::string trim_copy(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace pqa
