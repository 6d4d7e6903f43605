#pragma once

#include <array>
#include <cctype>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "perceptqa/facts.hpp"
#include "perceptqa/rng.hpp"

namespace pqa {

struct PerceptionQA {
  std::string question;
  Answer answer;
  QuestionCategory category = QuestionCategory::Shapes;
  FactKind kind = FactKind::ShapeKindQuery;
  std::string fact_id;  // paraphrase-group key of the source fact
};

inline constexpr int kMaxQuestionsPerSample = 7;

// Question-type mix observed in the published dataset, used as sampling
// weights so generated batches lean toward the same shares.
inline constexpr std::array<double, kCategoryCount> kCategoryTargetCounts = {
    4387, 1737, 1405, 46, 243, 5662, 1108, 500, 234, 432, 410, 177};

// Share of samples carrying 1..7 questions, drawn before clipping against
// the number of facts a scene actually supports.
inline constexpr std::array<double, 7> kQuestionCountWeights = {8, 18, 26, 20, 10, 10, 8};

// Picks at most max_q facts, one per paraphrase group, weighted toward the
// published category mix. Returns an empty list for scenes with fewer than
// two question-worthy facts.
inline std::vector<PerceptionQA> generate_qas(const Scene& scene, std::uint64_t seed,
                                              int max_q = kMaxQuestionsPerSample) {
  if (max_q < 1 || max_q > kMaxQuestionsPerSample)
    fail(Err::OutOfRange, "question cap must sit in [1, 7]");
  std::vector<Fact> facts = enumerate_facts(scene);

  Rng rng(Rng::mix(seed, 0x9E5710ULL));

  // One candidate per group, chosen uniformly inside the group.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<const Fact*>> groups;
  for (const Fact& f : facts) {
    auto& bucket = groups[f.group];
    if (bucket.empty()) group_order.push_back(f.group);
    bucket.push_back(&f);
  }
  std::vector<const Fact*> pool;
  pool.reserve(group_order.size());
  for (const auto& g : group_order) {
    const auto& bucket = groups[g];
    pool.push_back(bucket[bucket.size() == 1 ? 0 : rng.below(bucket.size())]);
  }
  if (pool.size() < 2) return {};

  std::vector<double> count_weights(kQuestionCountWeights.begin(), kQuestionCountWeights.end());
  int target = static_cast<int>(rng.weighted(count_weights)) + 1;
  std::size_t n = std::min({static_cast<std::size_t>(std::min(target, max_q)), pool.size()});

  // Category-first draw: weight categories by the published mix, then take a
  // uniform fact within the chosen category.
  std::array<std::vector<const Fact*>, kCategoryCount> by_cat;
  for (const Fact* f : pool) by_cat[static_cast<int>(f->category)].push_back(f);

  std::vector<PerceptionQA> out;
  out.reserve(n);
  while (out.size() < n) {
    std::vector<double> weights(kCategoryCount, 0.0);
    for (int c = 0; c < kCategoryCount; ++c)
      if (!by_cat[c].empty()) weights[static_cast<std::size_t>(c)] = kCategoryTargetCounts[static_cast<std::size_t>(c)];
    int cat = static_cast<int>(rng.weighted(weights));
    auto& bucket = by_cat[cat];
    std::size_t at = bucket.size() == 1 ? 0 : rng.below(bucket.size());
    const Fact* f = bucket[at];
    bucket.erase(bucket.begin() + static_cast<long>(at));
    out.push_back({f->question, f->answer, f->category, f->kind, f->group});
  }
  return out;
}

// ===== Verification =====

enum class VerifyStatus { Valid, AnswerContradicted, ElementMissing, Unverifiable };

inline const char* verify_status_name(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Valid: return "Valid";
    case VerifyStatus::AnswerContradicted: return "AnswerContradicted";
    case VerifyStatus::ElementMissing: return "ElementMissing";
    case VerifyStatus::Unverifiable: return "Unverifiable";
  }
  return "?";
}

struct VerifyReport {
  VerifyStatus status = VerifyStatus::Valid;
  std::string detail;
};

// Checks one (question, answer) pair against a scene's fact list. Facts are
// matched by exact question text; generated questions always hit.
inline VerifyReport verify_qa(const Scene& scene, const std::vector<Fact>& facts,
                              const std::string& question, const std::string& answer) {
  for (const Fact& f : facts) {
    if (f.question != question) continue;
    if (match_answer(answer, f.answer)) return {VerifyStatus::Valid, ""};
    return {VerifyStatus::AnswerContradicted,
            "expected '" + answer_to_string(f.answer) + "', got '" + answer + "'"};
  }

  // Unknown question: if it names a point the scene does not have, that is a
  // missing element; otherwise we simply cannot check it.
  std::set<char> known;
  for (const auto& lp : labeled_points(scene)) known.insert(lp.label);
  const std::string& q = question;
  for (std::size_t i = 0; i < q.size();) {
    if (!std::isupper(static_cast<unsigned char>(q[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < q.size() && std::isupper(static_cast<unsigned char>(q[j]))) ++j;
    bool word_start = i == 0 || !std::isalpha(static_cast<unsigned char>(q[i - 1]));
    bool word_end = j == q.size() || !std::isalpha(static_cast<unsigned char>(q[j]));
    if (word_start && word_end && j - i <= 5) {
      for (std::size_t k = i; k < j; ++k)
        if (!known.count(q[k]))
          return {VerifyStatus::ElementMissing, std::string("no point '") + q[k] + "' in scene"};
    }
    i = j;
  }
  return {VerifyStatus::Unverifiable, "question does not match any scene fact"};
}

inline VerifyReport verify_qa(const Scene& scene, const std::string& question,
                              const std::string& answer) {
  return verify_qa(scene, enumerate_facts(scene), question, answer);
}

// ===== External QA ingestion =====

// Line format (ingest/1): one JSON object per line with fields
// {image, question, answer, source, category?}.
struct IngestedRecord {
  bool ok = false;
  std::string error;  // line-level diagnostic when not ok
  std::string image;
  std::string question;
  std::string answer_text;
  Answer answer;
  QuestionCategory category = QuestionCategory::OtherElement;
  std::string source = "real";
};

namespace detail {

inline bool whole_string_number(const std::string& s, double* out) {
  std::string t = trim_copy(s);
  // Unit suffixes readers commonly attach to numeric answers.
  for (const char* suffix : {"\xC2\xB0", "degrees", "degree", "deg", "units", "unit", "cm"}) {
    std::size_t n = std::string(suffix).size();
    if (t.size() > n && lower_copy(t.substr(t.size() - n)) == suffix)
      t = trim_copy(t.substr(0, t.size() - n));
  }
  if (t.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

inline Answer normalize_answer_text(const std::string& raw) {
  std::string low = lower_copy(trim_copy(raw));
  if (low == "yes" || low == "y" || low == "true") return Answer::yes_no(true);
  if (low == "no" || low == "n" || low == "false") return Answer::yes_no(false);
  double v = 0;
  if (whole_string_number(raw, &v)) return Answer::number(v);
  std::string t = trim_copy(raw);
  for (char c : t)
    if (std::isspace(static_cast<unsigned char>(c)))
      fail(Err::SchemaViolation, "token answer contains whitespace: '" + raw + "'");
  TokenForm form = TokenForm::Plain;
  bool all_upper = !t.empty();
  for (char c : t)
    if (!std::isupper(static_cast<unsigned char>(c))) all_upper = false;
  if (all_upper && t.size() == 2) form = TokenForm::Segment;
  if (all_upper && t.size() == 3) form = TokenForm::Angle;
  return Answer::word(t, form);
}

}  // namespace detail

// Parses externally produced QA records. Malformed lines come back with
// ok=false and a diagnostic instead of aborting the batch. Records carry no
// scene graph, so they verify as Unverifiable and are retained flagged.
inline std::vector<IngestedRecord> ingest_external(std::istream& in) {
  std::vector<IngestedRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_copy(line).empty()) continue;
    IngestedRecord rec;
    auto reject = [&](const std::string& why) {
      rec.ok = false;
      rec.error = "line " + std::to_string(line_no) + ": " + why;
      out.push_back(rec);
    };
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      reject("not a JSON object");
      continue;
    }
    bool fields_ok = true;
    for (const char* key : {"image", "question", "answer", "source"})
      if (!j.contains(key) || !j[key].is_string()) {
        reject(std::string("missing or non-string field '") + key + "'");
        fields_ok = false;
        break;
      }
    if (!fields_ok) continue;
    rec.image = j["image"].get<std::string>();
    rec.question = j["question"].get<std::string>();
    rec.answer_text = j["answer"].get<std::string>();
    rec.source = j["source"].get<std::string>();
    try {
      rec.answer = detail::normalize_answer_text(rec.answer_text);
      if (j.contains("category")) {
        if (!j["category"].is_string()) fail(Err::SchemaViolation, "category must be a string");
        rec.category = category_from_name(j["category"].get<std::string>());
      }
    } catch (const Error& e) {
      reject(e.what());
      continue;
    }
    rec.ok = true;
    out.push_back(rec);
  }
  return out;
}

}  // namespace pqa
