#pragma once

#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <perceptqa/dataset.hpp>

namespace pqa {

// ===== Prompt formatting =====

struct PerceptionInput {
  std::string instruction;
  std::vector<std::string> questions;  // 1..7
};

// The emitted prompt fixes the output contract the parser relies on: a final
// line of the form "Answers: 1. ... 2. ...".
inline std::string format_prompt(const PerceptionInput& input) {
  if (input.questions.empty() ||
      input.questions.size() > static_cast<std::size_t>(kMaxQuestionsPerSample))
    fail(Err::OutOfRange,
         "prompt needs 1.." + std::to_string(kMaxQuestionsPerSample) + " questions");
  std::ostringstream out;
  out << input.instruction << "\n\nQuestions:\n";
  for (std::size_t i = 0; i < input.questions.size(); ++i)
    out << (i + 1) << ". " << input.questions[i] << "\n";
  out << "\nAnswer every question. End your reply with one line of the form:\n"
      << "Answers: 1. <answer> 2. <answer> ...\n";
  return out.str();
}

// ===== Response parsing =====

struct ExtractedAnswers {
  std::vector<std::optional<std::string>> predictions;  // aligned 0..n-1
};

namespace detail {

// Marker "k." or "k)" at a word boundary. A '.' followed by a digit is a
// decimal point, not a marker.
struct Marker {
  std::size_t pos = 0;   // start of the digits
  std::size_t after = 0; // first char past the punctuation
  int number = 0;
};

inline std::vector<Marker> scan_markers(const std::string& text, std::size_t from) {
  std::vector<Marker> out;
  for (std::size_t i = from; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    if (i > 0 && (std::isalnum(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == '.'))
      continue;
    std::size_t j = i;
    long value = 0;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])) && value < 1000) {
      value = value * 10 + (text[j] - '0');
      ++j;
    }
    if (j >= text.size() || (text[j] != '.' && text[j] != ')')) {
      i = j;
      continue;
    }
    if (text[j] == '.' && j + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
      i = j;
      continue;
    }
    out.push_back({i, j + 1, static_cast<int>(value)});
    i = j;
  }
  return out;
}

inline std::optional<std::string> slice_value(const std::string& text,
                                              const std::vector<Marker>& markers, std::size_t idx) {
  std::size_t begin = markers[idx].after;
  std::size_t end = idx + 1 < markers.size() ? markers[idx + 1].pos : text.size();
  std::string value = trim_copy(text.substr(begin, end - begin));
  if (value.empty()) return std::nullopt;
  return value;
}

// Aligns markers to question indices 1..n in reading order; repeated indices
// keep the first occurrence.
inline ExtractedAnswers extract_from(const std::string& text, std::size_t from, int n) {
  ExtractedAnswers out;
  out.predictions.assign(static_cast<std::size_t>(n), std::nullopt);
  auto markers = scan_markers(text, from);
  for (std::size_t m = 0; m < markers.size(); ++m) {
    int k = markers[m].number;
    if (k < 1 || k > n) continue;
    auto& slot = out.predictions[static_cast<std::size_t>(k - 1)];
    if (slot) continue;
    slot = slice_value(text, markers, m);
  }
  return out;
}

inline std::size_t find_last_answers_block(const std::string& text) {
  static const std::string needle = "answers:";
  std::string lower = lower_copy(text);
  std::size_t best = std::string::npos;
  for (std::size_t pos = lower.find(needle); pos != std::string::npos;
       pos = lower.find(needle, pos + 1))
    best = pos;
  return best == std::string::npos ? std::string::npos : best + needle.size();
}

inline std::pair<ExtractedAnswers, const char*> parse_response_traced(const std::string& response,
                                                                      int n) {
  if (n < 1) fail(Err::OutOfRange, "parse_response needs n >= 1");
  std::size_t block = find_last_answers_block(response);
  if (block != std::string::npos) {
    ExtractedAnswers primary = extract_from(response, block, n);
    for (const auto& p : primary.predictions)
      if (p) return {primary, "answers-block"};
  }
  ExtractedAnswers fallback = extract_from(response, 0, n);
  for (const auto& p : fallback.predictions)
    if (p) return {fallback, "markers"};
  return {fallback, "none"};
}

}  // namespace detail

// Total over arbitrary strings. Primary strategy reads the final "Answers:"
// block; when that yields nothing, numbered markers anywhere in the text are
// used as a fallback.
inline ExtractedAnswers parse_response(const std::string& response, int n) {
  return detail::parse_response_traced(response, n).first;
}

// ===== Strict scoring =====

struct RewardRecord {
  std::vector<bool> matches;
  int reward = 0;  // strict: 1 only when every answer is present and correct
  std::string parse_status;  // "answers-block", "markers", or "none"
  std::vector<std::string> mismatch_reasons;
};

inline RewardRecord score_strict(const PerceptionInput& input, const std::string& response,
                                 const std::vector<Answer>& gold) {
  if (gold.size() != input.questions.size())
    fail(Err::GoldMismatch, "have " + std::to_string(gold.size()) + " gold answers for " +
                                std::to_string(input.questions.size()) + " questions");
  int n = static_cast<int>(input.questions.size());
  if (n < 1) fail(Err::OutOfRange, "empty question list");

  auto [extracted, status] = detail::parse_response_traced(response, n);
  RewardRecord rec;
  rec.parse_status = status;

  bool all_ok = true;
  for (int i = 0; i < n; ++i) {
    const auto& pred = extracted.predictions[static_cast<std::size_t>(i)];
    bool ok = pred.has_value() && match_answer(*pred, gold[static_cast<std::size_t>(i)]);
    rec.matches.push_back(ok);
    if (!ok) {
      all_ok = false;
      std::string why = !pred.has_value()
                            ? "no answer extracted"
                            : "'" + *pred + "' does not match '" +
                                  answer_to_string(gold[static_cast<std::size_t>(i)]) + "'";
      rec.mismatch_reasons.push_back("q" + std::to_string(i + 1) + ": " + why);
    }
  }
  rec.reward = all_ok ? 1 : 0;
  return rec;
}

// ===== Judge interface =====

struct JudgeVerdict {
  std::vector<std::optional<std::string>> extracted;
  std::vector<bool> verdicts;
};

// Extraction plus per-question verdicts behind one interface so the
// rule-based default and a remote service are interchangeable.
class AnswerJudge {
 public:
  virtual ~AnswerJudge() = default;
  virtual JudgeVerdict judge(const std::vector<std::string>& questions,
                             const std::vector<Answer>& gold, const std::string& response) = 0;
};

class RuleJudge final : public AnswerJudge {
 public:
  JudgeVerdict judge(const std::vector<std::string>& questions, const std::vector<Answer>& gold,
                     const std::string& response) override {
    if (gold.size() != questions.size()) fail(Err::GoldMismatch, "gold/question arity mismatch");
    JudgeVerdict v;
    v.extracted = parse_response(response, static_cast<int>(questions.size())).predictions;
    for (std::size_t i = 0; i < gold.size(); ++i)
      v.verdicts.push_back(v.extracted[i].has_value() && match_answer(*v.extracted[i], gold[i]));
    return v;
  }
};

// ===== Batch evaluation =====

struct CategoryAccuracy {
  int total = 0;
  int correct = 0;
};

struct AccuracyReport {
  int samples = 0;
  int questions = 0;
  int samples_correct = 0;
  int questions_correct = 0;
  double sample_accuracy = 0;    // strict: every question right
  double question_accuracy = 0;
  std::array<CategoryAccuracy, kCategoryCount> per_category{};
};

inline AccuracyReport evaluate_accuracy(const std::vector<Sample>& test,
                                        const std::map<std::string, std::string>& responses,
                                        AnswerJudge& judge) {
  std::string missing;
  for (const auto& s : test)
    if (!responses.count(s.id)) missing += (missing.empty() ? "" : ", ") + s.id;
  if (!missing.empty()) fail(Err::MissingResponse, "no response for: " + missing);

  AccuracyReport rep;
  for (const auto& s : test) {
    std::vector<std::string> questions;
    std::vector<Answer> gold;
    for (const auto& qa : s.qas) {
      questions.push_back(qa.question);
      gold.push_back(qa.answer);
    }
    JudgeVerdict v = judge.judge(questions, gold, responses.at(s.id));
    if (v.verdicts.size() != s.qas.size())
      fail(Err::JudgeUnavailable, "judge returned " + std::to_string(v.verdicts.size()) +
                                      " verdicts for " + std::to_string(s.qas.size()) + " questions");
    rep.samples += 1;
    bool all_ok = true;
    for (std::size_t i = 0; i < s.qas.size(); ++i) {
      rep.questions += 1;
      auto& cat = rep.per_category[static_cast<std::size_t>(s.qas[i].category)];
      cat.total += 1;
      if (v.verdicts[i]) {
        rep.questions_correct += 1;
        cat.correct += 1;
      } else {
        all_ok = false;
      }
    }
    if (all_ok) rep.samples_correct += 1;
  }
  if (rep.samples > 0) rep.sample_accuracy = static_cast<double>(rep.samples_correct) / rep.samples;
  if (rep.questions > 0)
    rep.question_accuracy = static_cast<double>(rep.questions_correct) / rep.questions;
  return rep;
}

inline AccuracyReport evaluate_accuracy(const std::vector<Sample>& test,
                                        const std::map<std::string, std::string>& responses) {
  RuleJudge judge;
  return evaluate_accuracy(test, responses, judge);
}

inline json accuracy_to_json(const AccuracyReport& rep) {
  json j;
  j["samples"] = rep.samples;
  j["questions"] = rep.questions;
  j["samples_correct"] = rep.samples_correct;
  j["questions_correct"] = rep.questions_correct;
  j["sample_accuracy"] = rep.sample_accuracy;
  j["question_accuracy"] = rep.question_accuracy;
  j["per_category"] = json::object();
  for (int c = 0; c < kCategoryCount; ++c) {
    const auto& cat = rep.per_category[static_cast<std::size_t>(c)];
    if (cat.total == 0) continue;
    j["per_category"][category_name(static_cast<QuestionCategory>(c))] =
        json{{"total", cat.total}, {"correct", cat.correct}};
  }
  return j;
}

inline std::string render_accuracy(const AccuracyReport& rep) {
  std::ostringstream out;
  char buf[160];
  out << "Evaluation report\n";
  std::snprintf(buf, sizeof buf, "  samples   %5d  strict accuracy %6.2f%%\n", rep.samples,
                100.0 * rep.sample_accuracy);
  out << buf;
  std::snprintf(buf, sizeof buf, "  questions %5d  accuracy        %6.2f%%\n", rep.questions,
                100.0 * rep.question_accuracy);
  out << buf;
  out << "\nPer category (correct/total)\n";
  for (int c = 0; c < kCategoryCount; ++c) {
    const auto& cat = rep.per_category[static_cast<std::size_t>(c)];
    if (cat.total == 0) continue;
    std::snprintf(buf, sizeof buf, "  %-22s %5d /%5d  %6.2f%%\n",
                  category_display(static_cast<QuestionCategory>(c)), cat.correct, cat.total,
                  100.0 * cat.correct / cat.total);
    out << buf;
  }
  return out.str();
}

// ===== Responses file =====

inline std::map<std::string, std::string> read_responses_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_copy(line).empty()) continue;
    std::string where = path.filename().string() + ":" + std::to_string(lineno) + ": ";
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("sample_id") ||
        !j.contains("response_text") || !j["sample_id"].is_string() ||
        !j["response_text"].is_string())
      fail(Err::CorruptDataset, where + "expected {sample_id, response_text}");
    if (!out.emplace(j["sample_id"].get<std::string>(), j["response_text"].get<std::string>()).second)
      fail(Err::CorruptDataset, where + "duplicate sample_id");
  }
  return out;
}

inline void write_responses_jsonl(const std::filesystem::path& path,
                                  const std::map<std::string, std::string>& responses) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::IoError, "cannot write " + path.string());
  for (const auto& [id, text] : responses) {
    json j;
    j["sample_id"] = id;
    j["response_text"] = text;
    out << j.dump() << '\n';
  }
}

}  // namespace pqa
