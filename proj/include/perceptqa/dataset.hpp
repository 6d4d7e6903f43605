#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <perceptqa/qa.hpp>

namespace pqa {

// ===== Samples =====

struct Sample {
  std::string id;
  std::string image_path;
  std::optional<std::string> scene_path;  // synthetic samples only
  std::string source = "synthetic";
  std::vector<PerceptionQA> qas;  // 1..7
};

// "All-yes" means every gold answer is the literal yes; these samples are what
// an always-yes policy would score perfectly on.
inline bool all_yes(const Sample& s) {
  if (s.qas.empty()) return false;
  for (const auto& qa : s.qas)
    if (qa.answer.kind != AnswerKind::YesNo || !qa.answer.truth) return false;
  return true;
}

inline const char* answer_kind_name(AnswerKind k) {
  switch (k) {
    case AnswerKind::YesNo: return "yesno";
    case AnswerKind::Number: return "number";
    case AnswerKind::Token: return "token";
  }
  return "?";
}

inline AnswerKind answer_kind_from_name(const std::string& s) {
  if (s == "yesno") return AnswerKind::YesNo;
  if (s == "number") return AnswerKind::Number;
  if (s == "token") return AnswerKind::Token;
  fail(Err::SchemaViolation, "unknown answer kind '" + s + "'");
}

inline const char* token_form_name(TokenForm f) {
  switch (f) {
    case TokenForm::Plain: return "plain";
    case TokenForm::Segment: return "segment";
    case TokenForm::Angle: return "angle";
  }
  return "?";
}

inline TokenForm token_form_from_name(const std::string& s) {
  if (s == "plain") return TokenForm::Plain;
  if (s == "segment") return TokenForm::Segment;
  if (s == "angle") return TokenForm::Angle;
  fail(Err::SchemaViolation, "unknown token form '" + s + "'");
}

// Answers travel as display strings plus "type" and the conditional
// "form"/"tolerance" fields that reconstruct the matching semantics. The
// same encoding serves dataset records and the remote-judge protocol.
inline void answer_into_json(json& j, const Answer& a) {
  j["answer"] = answer_to_string(a);
  j["type"] = answer_kind_name(a.kind);
  if (a.kind == AnswerKind::Token) j["form"] = token_form_name(a.form);
  if (a.kind == AnswerKind::Number) j["tolerance"] = a.cmp_tolerance;
}

inline Answer answer_from_json(const json& j) {
  std::string text = j.at("answer").get<std::string>();
  switch (answer_kind_from_name(j.at("type").get<std::string>())) {
    case AnswerKind::YesNo:
      if (text != "yes" && text != "no") fail(Err::SchemaViolation, "yesno answer must be yes/no");
      return Answer::yes_no(text == "yes");
    case AnswerKind::Number: {
      double v = 0;
      if (!detail::whole_string_number(text, &v))
        fail(Err::SchemaViolation, "unparseable number answer '" + text + "'");
      return Answer::number(v, j.at("tolerance").get<double>());
    }
    case AnswerKind::Token:
      for (char c : text)
        if (std::isspace(static_cast<unsigned char>(c)))
          fail(Err::SchemaViolation, "token answer contains whitespace");
      return Answer::word(text, token_form_from_name(j.at("form").get<std::string>()));
  }
  fail(Err::SchemaViolation, "unreachable answer kind");
}

// Dataset record layout, format_version 1. Key order is fixed so that
// parse -> re-serialize is byte-identical.
inline json qa_to_json(const PerceptionQA& qa) {
  json j;
  j["question"] = qa.question;
  answer_into_json(j, qa.answer);
  j["category"] = category_name(qa.category);
  j["fact"] = qa.fact_id;
  return j;
}

inline PerceptionQA qa_from_json(const json& j) {
  PerceptionQA qa;
  qa.question = j.at("question").get<std::string>();
  qa.category = category_from_name(j.at("category").get<std::string>());
  qa.fact_id = j.at("fact").get<std::string>();
  qa.answer = answer_from_json(j);
  return qa;
}

inline json sample_to_json(const Sample& s) {
  json j;
  j["id"] = s.id;
  j["image"] = s.image_path;
  if (s.scene_path) j["scene"] = *s.scene_path;
  j["source"] = s.source;
  j["qas"] = json::array();
  for (const auto& qa : s.qas) j["qas"].push_back(qa_to_json(qa));
  return j;
}

inline Sample sample_from_json(const json& j) {
  Sample s;
  s.id = j.at("id").get<std::string>();
  s.image_path = j.at("image").get<std::string>();
  if (j.contains("scene")) s.scene_path = j.at("scene").get<std::string>();
  s.source = j.at("source").get<std::string>();
  if (s.id.empty()) fail(Err::SchemaViolation, "empty sample id");
  const json& qas = j.at("qas");
  if (!qas.is_array() || qas.empty() || qas.size() > static_cast<std::size_t>(kMaxQuestionsPerSample))
    fail(Err::SchemaViolation,
         "sample must carry 1.." + std::to_string(kMaxQuestionsPerSample) + " questions, got " +
             std::to_string(qas.size()));
  for (const auto& q : qas) s.qas.push_back(qa_from_json(q));
  return s;
}

inline void write_samples_jsonl(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::IoError, "cannot write " + path.string());
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

inline std::vector<Sample> read_samples_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot read " + path.string());
  std::vector<Sample> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_copy(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    std::string where = path.filename().string() + ":" + std::to_string(lineno) + ": ";
    if (j.is_discarded()) fail(Err::CorruptDataset, where + "invalid record syntax");
    try {
      samples.push_back(sample_from_json(j));
    } catch (const std::exception& e) {
      fail(Err::CorruptDataset, where + e.what());
    }
  }
  return samples;
}

// ===== Spec =====

// Published reference distribution the default stats baseline compares
// against: source totals, questions-per-sample shares (5+ aggregated), and
// the question-category share table.
inline constexpr std::array<double, 5> kReferenceCountShares = {9.56, 23.28, 35.15, 22.38, 9.63};
inline constexpr int kReferenceTrain = 5420;
inline constexpr int kReferenceTest = 659;
inline constexpr int kReferenceSyntheticImages = 2872;
inline constexpr int kReferenceSyntheticQuestions = 9303;
inline constexpr int kReferenceRealImages = 2548;
inline constexpr int kReferenceRealQuestions = 7038;

inline std::array<double, kCategoryCount> reference_category_shares() {
  std::array<double, kCategoryCount> shares{};
  double total = 0;
  for (double c : kCategoryTargetCounts) total += c;
  for (std::size_t i = 0; i < shares.size(); ++i)
    shares[i] = kCategoryTargetCounts[i] * 100.0 / total;
  return shares;
}

struct DatasetSpec {
  std::uint64_t seed = 0;
  // Percent of samples carrying k questions; index 4 is the aggregated "5+"
  // bucket, realized internally as counts 5:6:7 in ratio 3:2:1.
  std::array<double, 5> count_shares = kReferenceCountShares;
  std::array<double, kCategoryCount> category_shares = reference_category_shares();
  double all_yes_cap = 0.2;
  int train_n = kReferenceTrain;
  int test_n = kReferenceTest;
  // Exact-totals mode: when set, selection targets these counts instead of
  // the share table (train_n + test_n must equal image_total).
  std::optional<int> image_total;
  std::optional<int> question_total;
  // Per-source reference totals (images, questions) echoed into reports.
  std::map<std::string, std::pair<int, int>> source_baseline = {
      {"real", {kReferenceRealImages, kReferenceRealQuestions}},
      {"synthetic", {kReferenceSyntheticImages, kReferenceSyntheticQuestions}}};

  static DatasetSpec paper_defaults() { return DatasetSpec{}; }

  static DatasetSpec paper_synthetic() {
    DatasetSpec spec;
    spec.image_total = kReferenceSyntheticImages;
    spec.question_total = kReferenceSyntheticQuestions;
    spec.train_n = kReferenceSyntheticImages;
    spec.test_n = 0;
    return spec;
  }
};

inline void validate_spec(const DatasetSpec& spec) {
  auto sum_near_100 = [](const double* v, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return std::abs(s - 100.0) <= 0.01;
  };
  if (!sum_near_100(spec.count_shares.data(), spec.count_shares.size()))
    fail(Err::SpecInvalid, "question-count shares must sum to 100");
  if (!sum_near_100(spec.category_shares.data(), spec.category_shares.size()))
    fail(Err::SpecInvalid, "category shares must sum to 100");
  if (spec.all_yes_cap < 0 || spec.all_yes_cap > 1) fail(Err::SpecInvalid, "all_yes_cap outside [0,1]");
  if (spec.train_n < 0 || spec.test_n < 0) fail(Err::SpecInvalid, "negative split size");
  if (spec.image_total.has_value() != spec.question_total.has_value())
    fail(Err::SpecInvalid, "exact-totals mode needs both image and question totals");
  if (spec.image_total) {
    int n = *spec.image_total;
    if (n <= 0) fail(Err::SpecInvalid, "image total must be positive");
    if (spec.train_n + spec.test_n != n)
      fail(Err::SpecInvalid, "split sizes must sum to the image total");
    if (*spec.question_total < n || *spec.question_total > n * kMaxQuestionsPerSample)
      fail(Err::SpecInvalid, "question total outside [n, 7n]");
  }
}

// ===== Downsampling and splitting =====

// Keeps at most cap of the output all-yes: retained = floor(cap*non/(1-cap))
// is the largest k with k <= cap*(non+k). Removal is a seeded uniform draw;
// other samples pass through in order.
inline std::vector<Sample> downsample_all_yes(std::vector<Sample> samples, double cap,
                                              std::uint64_t seed) {
  if (cap < 0 || cap > 1) fail(Err::OutOfRange, "cap outside [0,1]");
  if (cap >= 1.0) return samples;
  std::vector<std::size_t> yes_idx;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (all_yes(samples[i])) yes_idx.push_back(i);
  std::size_t non = samples.size() - yes_idx.size();
  auto keep_target = static_cast<std::size_t>(
      std::floor(cap * static_cast<double>(non) / (1.0 - cap) + 1e-9));
  std::size_t keep = std::min(yes_idx.size(), keep_target);
  if (keep == yes_idx.size()) return samples;

  Rng rng(Rng::mix(seed, 0xD05A3FULL));
  rng.shuffle(yes_idx);
  std::set<std::size_t> kept(yes_idx.begin(), yes_idx.begin() + static_cast<std::ptrdiff_t>(keep));
  std::vector<Sample> out;
  out.reserve(non + keep);
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!all_yes(samples[i]) || kept.count(i)) out.push_back(std::move(samples[i]));
  return out;
}

// Seeded disjoint split. The test set is the first test_n positions of the
// permutation, so its membership does not move when train_n grows.
inline std::pair<std::vector<Sample>, std::vector<Sample>> split_samples(
    const std::vector<Sample>& samples, int train_n, int test_n, std::uint64_t seed) {
  if (train_n < 0 || test_n < 0) fail(Err::OutOfRange, "negative split size");
  std::size_t need = static_cast<std::size_t>(train_n) + static_cast<std::size_t>(test_n);
  if (need > samples.size())
    fail(Err::InsufficientSamples, "split needs " + std::to_string(need) + " samples, have " +
                                       std::to_string(samples.size()));
  std::vector<std::size_t> perm(samples.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(Rng::mix(seed, 0x5B117ULL));
  rng.shuffle(perm);

  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<Sample> part;
    part.reserve(count);
    for (std::size_t i = 0; i < count; ++i) part.push_back(samples[perm[from + i]]);
    std::sort(part.begin(), part.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
    return part;
  };
  auto test = take(0, static_cast<std::size_t>(test_n));
  auto train = take(static_cast<std::size_t>(test_n), static_cast<std::size_t>(train_n));
  return {std::move(train), std::move(test)};
}

// ===== Selection targets =====

namespace detail {

inline int qa_bucket(const Sample& s) { return static_cast<int>(s.qas.size()); }

// Largest-remainder apportionment of n slots over non-negative weights.
inline std::vector<int> apportion(const std::vector<double>& weights, int n) {
  double total = 0;
  for (double w : weights) total += w;
  std::vector<int> out(weights.size(), 0);
  if (total <= 0 || n <= 0) return out;
  std::vector<std::pair<double, std::size_t>> rema;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = weights[i] * n / total;
    out[i] = static_cast<int>(std::floor(exact + 1e-12));
    assigned += out[i];
    rema.push_back({exact - out[i], i});
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - assigned; ++k) out[rema[static_cast<std::size_t>(k)].second]++;
  return out;
}

// Per-question-count sample targets for a share-table spec. The aggregated
// "5+" share is split over counts 5..7 in ratio 3:2:1.
inline std::array<int, 7> bucket_targets(const DatasetSpec& spec, int n_total) {
  std::vector<double> w(7, 0.0);
  for (int k = 1; k <= 4; ++k) w[static_cast<std::size_t>(k - 1)] = spec.count_shares[static_cast<std::size_t>(k - 1)];
  w[4] = spec.count_shares[4] * 3.0 / 6.0;
  w[5] = spec.count_shares[4] * 2.0 / 6.0;
  w[6] = spec.count_shares[4] * 1.0 / 6.0;
  auto v = apportion(w, n_total);
  std::array<int, 7> out{};
  for (int i = 0; i < 7; ++i) out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
  return out;
}

// Exact-totals targets: start from the pool's own count mix, then shift one
// sample at a time between adjacent buckets until the question sum is exact.
inline std::array<int, 7> totals_targets(const std::array<int, 7>& avail, int images, int questions) {
  long pool = 0;
  for (int a : avail) pool += a;
  if (pool < images)
    fail(Err::InsufficientSamples,
         "need " + std::to_string(images) + " samples, have " + std::to_string(pool));
  std::vector<double> w(avail.begin(), avail.end());
  auto init = apportion(w, images);
  std::array<int, 7> n{};
  int assigned = 0;
  for (int k = 0; k < 7; ++k) {
    n[static_cast<std::size_t>(k)] = std::min(init[static_cast<std::size_t>(k)], avail[static_cast<std::size_t>(k)]);
    assigned += n[static_cast<std::size_t>(k)];
  }
  for (int k = 0; assigned < images && k < 7; ++k) {
    int room = avail[static_cast<std::size_t>(k)] - n[static_cast<std::size_t>(k)];
    int add = std::min(room, images - assigned);
    n[static_cast<std::size_t>(k)] += add;
    assigned += add;
  }
  if (assigned < images) fail(Err::InsufficientSamples, "bucket capacities below image total");

  auto question_sum = [&n]() {
    long s = 0;
    for (int k = 0; k < 7; ++k) s += static_cast<long>(k + 1) * n[static_cast<std::size_t>(k)];
    return s;
  };
  long s = question_sum();
  while (s != questions) {
    bool moved = false;
    if (s > questions) {
      for (int k = 6; k >= 1 && !moved; --k)
        if (n[static_cast<std::size_t>(k)] > 0 && n[static_cast<std::size_t>(k - 1)] < avail[static_cast<std::size_t>(k - 1)]) {
          n[static_cast<std::size_t>(k)]--;
          n[static_cast<std::size_t>(k - 1)]++;
          --s;
          moved = true;
        }
    } else {
      for (int k = 0; k <= 5 && !moved; ++k)
        if (n[static_cast<std::size_t>(k)] > 0 && n[static_cast<std::size_t>(k + 1)] < avail[static_cast<std::size_t>(k + 1)]) {
          n[static_cast<std::size_t>(k)]--;
          n[static_cast<std::size_t>(k + 1)]++;
          ++s;
          moved = true;
        }
    }
    if (!moved)
      fail(Err::InsufficientSamples, "pool cannot realize " + std::to_string(questions) +
                                         " questions over " + std::to_string(images) + " samples");
  }
  return n;
}

// Fills each count bucket to its target, greedily preferring samples whose
// categories are under-represented so far. Candidate order is seeded; the
// greedy scan looks at a bounded window to stay near-linear.
inline std::vector<Sample> select_to_targets(const std::vector<Sample>& pool,
                                             const std::array<int, 7>& targets,
                                             const std::array<double, kCategoryCount>& category_shares,
                                             std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 7> buckets;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    int c = qa_bucket(pool[i]);
    if (c >= 1 && c <= 7) buckets[static_cast<std::size_t>(c - 1)].push_back(i);
  }
  std::string deficits;
  for (int k = 0; k < 7; ++k) {
    if (static_cast<int>(buckets[static_cast<std::size_t>(k)].size()) < targets[static_cast<std::size_t>(k)]) {
      if (!deficits.empty()) deficits += "; ";
      deficits += "count " + std::to_string(k + 1) + ": need " +
                  std::to_string(targets[static_cast<std::size_t>(k)]) + ", have " +
                  std::to_string(buckets[static_cast<std::size_t>(k)].size());
    }
  }
  if (!deficits.empty()) fail(Err::InsufficientSamples, deficits);

  Rng rng(Rng::mix(seed, 0x5E1EC7ULL));
  for (auto& b : buckets) rng.shuffle(b);

  std::array<double, kCategoryCount> counts{};
  double total_q = 0;
  constexpr std::size_t kWindow = 48;
  std::vector<Sample> chosen;
  for (int k = 0; k < 7; ++k) {
    auto& cand = buckets[static_cast<std::size_t>(k)];
    std::size_t next = 0;
    for (int slot = 0; slot < targets[static_cast<std::size_t>(k)]; ++slot) {
      std::size_t best = next;
      double best_score = -1e300;
      std::size_t limit = std::min(cand.size(), next + kWindow);
      for (std::size_t w = next; w < limit; ++w) {
        double score = 0;
        for (const auto& qa : pool[cand[w]].qas) {
          auto c = static_cast<std::size_t>(qa.category);
          double now = total_q > 0 ? counts[c] / total_q : 0.0;
          score += category_shares[c] / 100.0 - now;
        }
        if (score > best_score) {
          best_score = score;
          best = w;
        }
      }
      std::swap(cand[next], cand[best]);
      const Sample& s = pool[cand[next]];
      for (const auto& qa : s.qas) counts[static_cast<std::size_t>(qa.category)] += 1;
      total_q += static_cast<double>(s.qas.size());
      chosen.push_back(s);
      ++next;
    }
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });
  return chosen;
}

}  // namespace detail

// ===== Statistics =====

struct DatasetStats {
  int total_samples = 0;
  int total_questions = 0;
  int train_samples = 0;
  int test_samples = 0;
  double mean_qas_per_sample = 0;
  std::map<std::string, std::pair<int, int>> per_source;  // source -> (images, questions)
  std::array<double, 5> count_shares{};                   // realized percent, bucket 5 = "5+"
  std::array<double, 5> count_share_dev{};                // |realized - baseline|
  double max_count_share_dev = 0;
  std::array<double, kCategoryCount> category_shares{};
  std::array<double, kCategoryCount> category_share_dev{};
  double max_category_share_dev = 0;
  double all_yes_train_fraction = 0;
  double all_yes_test_fraction = 0;
};

namespace detail {

inline void check_unique_ids(const std::vector<Sample>& samples, const char* what) {
  std::set<std::string> ids;
  for (const auto& s : samples)
    if (!ids.insert(s.id).second)
      fail(Err::CorruptDataset, std::string(what) + ": duplicate sample id " + s.id);
}

}  // namespace detail

inline DatasetStats compute_stats(const std::vector<Sample>& train, const std::vector<Sample>& test,
                                  const DatasetSpec& baseline = DatasetSpec::paper_defaults()) {
  DatasetStats st;
  st.train_samples = static_cast<int>(train.size());
  st.test_samples = static_cast<int>(test.size());
  std::array<int, 7> count_hist{};
  int yes_train = 0, yes_test = 0;
  auto absorb = [&](const std::vector<Sample>& part, int& yes_count) {
    for (const auto& s : part) {
      st.total_samples += 1;
      st.total_questions += static_cast<int>(s.qas.size());
      count_hist[s.qas.size() - 1] += 1;
      auto& src = st.per_source[s.source];
      src.first += 1;
      src.second += static_cast<int>(s.qas.size());
      if (all_yes(s)) yes_count += 1;
      for (const auto& qa : s.qas) st.category_shares[static_cast<std::size_t>(qa.category)] += 1;
    }
  };
  absorb(train, yes_train);
  absorb(test, yes_test);

  if (st.total_samples > 0) {
    st.mean_qas_per_sample = static_cast<double>(st.total_questions) / st.total_samples;
    for (int k = 0; k < 4; ++k)
      st.count_shares[static_cast<std::size_t>(k)] =
          100.0 * count_hist[static_cast<std::size_t>(k)] / st.total_samples;
    st.count_shares[4] = 100.0 * (count_hist[4] + count_hist[5] + count_hist[6]) / st.total_samples;
  }
  for (std::size_t k = 0; k < 5; ++k) {
    st.count_share_dev[k] = std::abs(st.count_shares[k] - baseline.count_shares[k]);
    st.max_count_share_dev = std::max(st.max_count_share_dev, st.count_share_dev[k]);
  }
  if (st.total_questions > 0)
    for (auto& c : st.category_shares) c = 100.0 * c / st.total_questions;
  for (std::size_t c = 0; c < st.category_shares.size(); ++c) {
    st.category_share_dev[c] = std::abs(st.category_shares[c] - baseline.category_shares[c]);
    st.max_category_share_dev = std::max(st.max_category_share_dev, st.category_share_dev[c]);
  }
  if (!train.empty()) st.all_yes_train_fraction = static_cast<double>(yes_train) / train.size();
  if (!test.empty()) st.all_yes_test_fraction = static_cast<double>(yes_test) / test.size();
  return st;
}

inline json stats_to_json(const DatasetStats& st) {
  json j;
  j["total_samples"] = st.total_samples;
  j["total_questions"] = st.total_questions;
  j["train_samples"] = st.train_samples;
  j["test_samples"] = st.test_samples;
  j["mean_qas_per_sample"] = st.mean_qas_per_sample;
  j["per_source"] = json::object();
  for (const auto& [src, iq] : st.per_source)
    j["per_source"][src] = json{{"images", iq.first}, {"questions", iq.second}};
  const char* bucket_names[5] = {"1", "2", "3", "4", "5+"};
  j["count_shares"] = json::object();
  for (std::size_t k = 0; k < 5; ++k) j["count_shares"][bucket_names[k]] = st.count_shares[k];
  j["max_count_share_dev"] = st.max_count_share_dev;
  j["category_shares"] = json::object();
  for (int c = 0; c < kCategoryCount; ++c)
    j["category_shares"][category_name(static_cast<QuestionCategory>(c))] =
        st.category_shares[static_cast<std::size_t>(c)];
  j["max_category_share_dev"] = st.max_category_share_dev;
  j["all_yes_train_fraction"] = st.all_yes_train_fraction;
  j["all_yes_test_fraction"] = st.all_yes_test_fraction;
  return j;
}

inline std::string render_stats(const DatasetStats& st, const DatasetSpec& baseline) {
  std::ostringstream out;
  char buf[160];
  out << "Dataset statistics\n";
  std::snprintf(buf, sizeof buf, "  samples   %6d  (train %d, test %d)\n", st.total_samples,
                st.train_samples, st.test_samples);
  out << buf;
  std::snprintf(buf, sizeof buf, "  questions %6d  (mean %.3f per sample)\n", st.total_questions,
                st.mean_qas_per_sample);
  out << buf;
  for (const auto& [src, iq] : st.per_source) {
    std::snprintf(buf, sizeof buf, "  source %-10s %5d images  %6d questions\n", src.c_str(),
                  iq.first, iq.second);
    out << buf;
  }
  out << "\nQuestions per sample (share %, baseline %, |dev| pp)\n";
  const char* bucket_names[5] = {"1", "2", "3", "4", "5+"};
  for (std::size_t k = 0; k < 5; ++k) {
    std::snprintf(buf, sizeof buf, "  %-2s %7.2f %8.2f %7.2f\n", bucket_names[k],
                  st.count_shares[k], baseline.count_shares[k], st.count_share_dev[k]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "  max deviation %.2f pp\n", st.max_count_share_dev);
  out << buf;
  out << "\nQuestion categories (share %, baseline %, |dev| pp)\n";
  for (int c = 0; c < kCategoryCount; ++c) {
    std::snprintf(buf, sizeof buf, "  %-22s %7.2f %8.2f %7.2f\n",
                  category_display(static_cast<QuestionCategory>(c)),
                  st.category_shares[static_cast<std::size_t>(c)],
                  baseline.category_shares[static_cast<std::size_t>(c)],
                  st.category_share_dev[static_cast<std::size_t>(c)]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "  max deviation %.2f pp\n", st.max_category_share_dev);
  out << buf;
  std::snprintf(buf, sizeof buf, "\nAll-yes samples: train %.1f%%, test %.1f%%\n",
                100.0 * st.all_yes_train_fraction, 100.0 * st.all_yes_test_fraction);
  out << buf;
  return out.str();
}

// Recomputes statistics purely from the emitted dataset files.
inline DatasetStats stats_report(const std::filesystem::path& dir,
                                 const DatasetSpec& baseline = DatasetSpec::paper_defaults()) {
  auto train = read_samples_jsonl(dir / "train.jsonl");
  std::vector<Sample> test;
  if (std::filesystem::exists(dir / "test.jsonl")) test = read_samples_jsonl(dir / "test.jsonl");
  std::vector<Sample> all = train;
  all.insert(all.end(), test.begin(), test.end());
  detail::check_unique_ids(all, "dataset");
  return compute_stats(train, test, baseline);
}

// ===== Assembly =====

struct AssembledDataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::array<int, 7> bucket_targets{};
};

// Deterministic packaging pipeline: sort the stream by id, downsample
// all-yes to the cap, select samples to the count/category targets, then
// split last. The test set is drawn only from samples carrying at least one
// non-yes answer, so an always-yes responder cannot score on it.
inline AssembledDataset assemble_select(const DatasetSpec& spec, std::vector<Sample> pool) {
  validate_spec(spec);
  if (pool.empty()) fail(Err::InsufficientSamples, "empty sample stream");
  std::sort(pool.begin(), pool.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
  detail::check_unique_ids(pool, "sample stream");
  for (const auto& s : pool)
    if (s.qas.empty() || s.qas.size() > static_cast<std::size_t>(kMaxQuestionsPerSample))
      fail(Err::CorruptDataset, "sample " + s.id + " carries " + std::to_string(s.qas.size()) + " questions");

  pool = downsample_all_yes(std::move(pool), spec.all_yes_cap, Rng::mix(spec.seed, 1));

  int n_total = spec.train_n + spec.test_n;
  std::array<int, 7> targets{};
  if (spec.image_total) {
    std::array<int, 7> avail{};
    for (const auto& s : pool) avail[s.qas.size() - 1] += 1;
    targets = detail::totals_targets(avail, *spec.image_total, *spec.question_total);
  } else {
    targets = detail::bucket_targets(spec, n_total);
  }
  std::vector<Sample> chosen =
      detail::select_to_targets(pool, targets, spec.category_shares, Rng::mix(spec.seed, 2));

  // Split last, test first: seeded draw over the non-all-yes subset.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < chosen.size(); ++i)
    if (!all_yes(chosen[i])) candidates.push_back(i);
  if (static_cast<int>(candidates.size()) < spec.test_n)
    fail(Err::InsufficientSamples,
         "test split needs " + std::to_string(spec.test_n) + " samples with a non-yes answer, have " +
             std::to_string(candidates.size()));
  Rng rng(Rng::mix(spec.seed, 3));
  rng.shuffle(candidates);
  std::set<std::size_t> test_idx(candidates.begin(),
                                 candidates.begin() + static_cast<std::ptrdiff_t>(spec.test_n));
  AssembledDataset out;
  out.bucket_targets = targets;
  for (std::size_t i = 0; i < chosen.size(); ++i)
    (test_idx.count(i) ? out.test : out.train).push_back(std::move(chosen[i]));
  auto by_id = [](const Sample& a, const Sample& b) { return a.id < b.id; };
  std::sort(out.train.begin(), out.train.end(), by_id);
  std::sort(out.test.begin(), out.test.end(), by_id);
  return out;
}

namespace detail {

inline void copy_into(const std::filesystem::path& src, const std::filesystem::path& dst) {
  std::error_code ec;
  if (std::filesystem::exists(dst, ec) && std::filesystem::equivalent(src, dst, ec)) return;
  std::filesystem::copy_file(src, dst, std::filesystem::copy_options::overwrite_existing, ec);
  if (ec) fail(Err::IoError, "copy " + src.string() + " -> " + dst.string() + ": " + ec.message());
}

// Moves a sample's referenced files under out_dir and rewrites its paths
// relative to the dataset root.
inline void relocate_sample(Sample& s, const std::filesystem::path& pool_root,
                            const std::filesystem::path& out_dir) {
  std::filesystem::path img = pool_root / s.image_path;
  std::filesystem::path img_dst = out_dir / "images" / img.filename();
  copy_into(img, img_dst);
  s.image_path = "images/" + img.filename().string();
  if (s.scene_path) {
    std::filesystem::path scn = pool_root / *s.scene_path;
    std::filesystem::path scn_dst = out_dir / "scenes" / scn.filename();
    copy_into(scn, scn_dst);
    s.scene_path = "scenes/" + scn.filename().string();
  }
}

}  // namespace detail

inline json spec_to_json(const DatasetSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  const char* bucket_names[5] = {"1", "2", "3", "4", "5+"};
  j["count_shares"] = json::object();
  for (std::size_t k = 0; k < 5; ++k) j["count_shares"][bucket_names[k]] = spec.count_shares[k];
  j["category_shares"] = json::object();
  for (int c = 0; c < kCategoryCount; ++c)
    j["category_shares"][category_name(static_cast<QuestionCategory>(c))] =
        spec.category_shares[static_cast<std::size_t>(c)];
  j["all_yes_cap"] = spec.all_yes_cap;
  j["train_n"] = spec.train_n;
  j["test_n"] = spec.test_n;
  if (spec.image_total) j["image_total"] = *spec.image_total;
  if (spec.question_total) j["question_total"] = *spec.question_total;
  j["source_baseline"] = json::object();
  for (const auto& [src, iq] : spec.source_baseline)
    j["source_baseline"][src] = json{{"images", iq.first}, {"questions", iq.second}};
  return j;
}

// Reads a spec written by spec_to_json. Absent fields keep their defaults,
// so a file holding only {"train_n": 100, "test_n": 10} is a valid override.
inline DatasetSpec spec_from_json(const json& j) {
  if (!j.is_object()) fail(Err::SpecInvalid, "spec file must hold a JSON object");
  DatasetSpec spec;
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("count_shares")) {
    const char* bucket_names[5] = {"1", "2", "3", "4", "5+"};
    for (std::size_t k = 0; k < 5; ++k)
      if (j.at("count_shares").contains(bucket_names[k]))
        spec.count_shares[k] = j.at("count_shares").at(bucket_names[k]).get<double>();
  }
  if (j.contains("category_shares"))
    for (int c = 0; c < kCategoryCount; ++c) {
      const char* name = category_name(static_cast<QuestionCategory>(c));
      if (j.at("category_shares").contains(name))
        spec.category_shares[static_cast<std::size_t>(c)] =
            j.at("category_shares").at(name).get<double>();
    }
  if (j.contains("all_yes_cap")) spec.all_yes_cap = j.at("all_yes_cap").get<double>();
  if (j.contains("train_n")) spec.train_n = j.at("train_n").get<int>();
  if (j.contains("test_n")) spec.test_n = j.at("test_n").get<int>();
  if (j.contains("image_total")) spec.image_total = j.at("image_total").get<int>();
  if (j.contains("question_total")) spec.question_total = j.at("question_total").get<int>();
  if (j.contains("source_baseline"))
    for (const auto& [src, iq] : j.at("source_baseline").items())
      spec.source_baseline[src] = {iq.at("images").get<int>(), iq.at("questions").get<int>()};
  return spec;
}

// Assembles dataset files under out_dir: train.jsonl, test.jsonl,
// manifest.json, stats.txt, plus images/ and scenes/ copied from the pool.
// Returned statistics are recomputed from the emitted files.
inline DatasetStats assemble(const DatasetSpec& spec, std::vector<Sample> pool,
                             const std::filesystem::path& pool_root,
                             const std::filesystem::path& out_dir) {
  AssembledDataset ds = assemble_select(spec, std::move(pool));
  std::filesystem::create_directories(out_dir / "images");
  std::filesystem::create_directories(out_dir / "scenes");
  for (auto* part : {&ds.train, &ds.test})
    for (auto& s : *part) detail::relocate_sample(s, pool_root, out_dir);
  write_samples_jsonl(out_dir / "train.jsonl", ds.train);
  write_samples_jsonl(out_dir / "test.jsonl", ds.test);

  DatasetStats stats = stats_report(out_dir, spec);
  json manifest;
  manifest["format_version"] = 1;
  manifest["spec"] = spec_to_json(spec);
  manifest["pipeline"] =
      "sort by id; downsample all-yes to cap; select to count/category targets; "
      "split last with the test set drawn from samples holding a non-yes answer";
  json targets = json::array();
  for (int t : ds.bucket_targets) targets.push_back(t);
  manifest["bucket_targets"] = targets;
  manifest["stats"] = stats_to_json(stats);
  std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
  if (!mf) fail(Err::IoError, "cannot write manifest.json");
  mf << manifest.dump(2) << '\n';
  std::ofstream sf(out_dir / "stats.txt", std::ios::binary);
  if (!sf) fail(Err::IoError, "cannot write stats.txt");
  sf << render_stats(stats, spec);
  return stats;
}

}  // namespace pqa
