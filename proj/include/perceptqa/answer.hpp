#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "perceptqa/common.hpp"

namespace pqa {

// Question taxonomy used for dataset balancing and reporting.
enum class QuestionCategory {
  Shapes,
  Angles,
  Lengths,
  AreaPerimeter,
  OtherElement,
  RelativePosition,
  Intersection,
  Perpendicularity,
  Parallelism,
  Tangency,
  CongruenceSimilarity,
  Transformation,
};

inline constexpr int kCategoryCount = 12;

inline const char* category_name(QuestionCategory c) {
  switch (c) {
    case QuestionCategory::Shapes: return "shapes";
    case QuestionCategory::Angles: return "angles";
    case QuestionCategory::Lengths: return "lengths";
    case QuestionCategory::AreaPerimeter: return "area_perimeter";
    case QuestionCategory::OtherElement: return "other_element";
    case QuestionCategory::RelativePosition: return "relative_position";
    case QuestionCategory::Intersection: return "intersection";
    case QuestionCategory::Perpendicularity: return "perpendicularity";
    case QuestionCategory::Parallelism: return "parallelism";
    case QuestionCategory::Tangency: return "tangency";
    case QuestionCategory::CongruenceSimilarity: return "congruence_similarity";
    case QuestionCategory::Transformation: return "transformation";
  }
  return "?";
}

inline const char* category_display(QuestionCategory c) {
  switch (c) {
    case QuestionCategory::Shapes: return "Shapes";
    case QuestionCategory::Angles: return "Angles";
    case QuestionCategory::Lengths: return "Lengths";
    case QuestionCategory::AreaPerimeter: return "Area/Perimeter";
    case QuestionCategory::OtherElement: return "Other elements";
    case QuestionCategory::RelativePosition: return "Relative position";
    case QuestionCategory::Intersection: return "Intersection";
    case QuestionCategory::Perpendicularity: return "Perpendicularity";
    case QuestionCategory::Parallelism: return "Parallelism";
    case QuestionCategory::Tangency: return "Tangency";
    case QuestionCategory::CongruenceSimilarity: return "Congruence/Similarity";
    case QuestionCategory::Transformation: return "Transformation";
  }
  return "?";
}

inline QuestionCategory category_from_name(std::string_view name) {
  for (int i = 0; i < kCategoryCount; ++i) {
    auto c = static_cast<QuestionCategory>(i);
    if (name == category_name(c)) return c;
  }
  fail(Err::SchemaViolation, "unknown question category '" + std::string(name) + "'");
}

enum class AnswerKind { YesNo, Number, Token };

// How a token answer tolerates reordering: segment labels read the same in
// either direction and an angle name keeps its middle letter fixed.
enum class TokenForm { Plain, Segment, Angle };

struct Answer {
  AnswerKind kind = AnswerKind::YesNo;
  bool truth = false;
  double value = 0;
  double cmp_tolerance = 0.01;
  std::string token;  // never contains whitespace
  TokenForm form = TokenForm::Plain;

  static Answer yes_no(bool v) {
    Answer a;
    a.kind = AnswerKind::YesNo;
    a.truth = v;
    return a;
  }
  static Answer number(double v, double tolerance = 0.01) {
    Answer a;
    a.kind = AnswerKind::Number;
    a.value = v;
    a.cmp_tolerance = tolerance;
    return a;
  }
  static Answer word(std::string t, TokenForm f = TokenForm::Plain) {
    Answer a;
    a.kind = AnswerKind::Token;
    a.token = std::move(t);
    a.form = f;
    return a;
  }
};

namespace detail {

inline std::string alnum_upper(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

inline bool parse_number(std::string_view s, double* out) {
  std::string buf(s);
  const char* p = buf.c_str();
  while (*p && !(std::isdigit(static_cast<unsigned char>(*p)) || *p == '-' || *p == '+' ||
                 *p == '.'))
    ++p;
  char* end = nullptr;
  double v = std::strtod(p, &end);
  if (end == p) return false;
  *out = v;
  return true;
}

}  // namespace detail

// Canonical token spelling: uppercase, alphanumerics only, then the form's
// reordering rule. Idempotent by construction.
inline std::string canonical_token(std::string_view raw, TokenForm form) {
  std::string up = detail::alnum_upper(raw);
  if (form == TokenForm::Segment) {
    std::sort(up.begin(), up.end());
    return up;
  }
  if (form == TokenForm::Angle) {
    std::string rev(up.rbegin(), up.rend());
    return std::min(up, rev);
  }
  return up;
}

// One predicted string against one gold answer. Total: unparseable input is
// simply a mismatch.
inline bool match_answer(std::string_view pred, const Answer& gold) {
  if (gold.kind == AnswerKind::YesNo) {
    std::string flat;
    for (char c : pred)
      if (std::isalnum(static_cast<unsigned char>(c)))
        flat.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    bool yes = flat == "yes" || flat == "y" || flat == "true";
    bool no = flat == "no" || flat == "n" || flat == "false";
    return (yes || no) && yes == gold.truth;
  }
  if (gold.kind == AnswerKind::Number) {
    double got = 0;
    if (!detail::parse_number(pred, &got)) return false;
    return std::abs(got - gold.value) <= gold.cmp_tolerance;
  }
  return canonical_token(pred, gold.form) == canonical_token(gold.token, gold.form);
}

// Gold answers serialize as bare yes/no words, integers when exact, otherwise
// two decimals.
inline std::string answer_to_string(const Answer& a) {
  switch (a.kind) {
    case AnswerKind::YesNo:
      return a.truth ? "yes" : "no";
    case AnswerKind::Number: {
      double r = std::round(a.value);
      if (std::abs(a.value - r) < 1e-6) return std::to_string(static_cast<long long>(r));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f", a.value);
      return buf;
    }
    case AnswerKind::Token:
      return a.token;
  }
  return "";
}

}  // namespace pqa
