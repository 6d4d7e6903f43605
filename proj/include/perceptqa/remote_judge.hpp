#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <perceptqa/reward.hpp>

namespace pqa {

// External judge wire contract, one POST per response to score:
//   request  {"questions": [...], "gold": [{answer,type,form?,tolerance?}...],
//             "response_text": "..."}
//   reply    {"extracted": [string or null, ...], "verdicts": [bool, ...]}
// Endpoint and credentials come from configuration or the PQA_JUDGE_URL /
// PQA_JUDGE_TOKEN environment variables.
struct RemoteJudgeConfig {
  std::string url;    // e.g. http://judge.local:8080/judge
  std::string token;  // optional bearer token
  int max_inflight = 8;
  int max_retries = 3;
  int backoff_ms = 200;      // doubled per retry
  int backoff_cap_ms = 2000;
  int timeout_s = 30;

  static RemoteJudgeConfig from_env() {
    RemoteJudgeConfig cfg;
    if (const char* url = std::getenv("PQA_JUDGE_URL")) cfg.url = url;
    if (const char* token = std::getenv("PQA_JUDGE_TOKEN")) cfg.token = token;
    return cfg;
  }
};

class RemoteJudge final : public AnswerJudge {
 public:
  explicit RemoteJudge(RemoteJudgeConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.url.empty())
      fail(Err::JudgeUnavailable, "no judge endpoint configured (set PQA_JUDGE_URL)");
    auto split = cfg_.url.find('/', cfg_.url.find("//") == std::string::npos
                                         ? 0
                                         : cfg_.url.find("//") + 2);
    base_ = split == std::string::npos ? cfg_.url : cfg_.url.substr(0, split);
    path_ = split == std::string::npos ? "/" : cfg_.url.substr(split);
    if (cfg_.max_inflight < 1) fail(Err::OutOfRange, "max_inflight must be positive");
  }

  JudgeVerdict judge(const std::vector<std::string>& questions, const std::vector<Answer>& gold,
                     const std::string& response) override {
    if (gold.size() != questions.size()) fail(Err::GoldMismatch, "gold/question arity mismatch");
    json req;
    req["questions"] = questions;
    req["gold"] = json::array();
    for (const auto& a : gold) {
      json g;
      answer_into_json(g, a);
      req["gold"].push_back(g);
    }
    req["response_text"] = response;
    std::string reply = post_with_retry(req.dump());
    return parse_reply(reply, questions.size());
  }

 private:
  // Counting gate bounding concurrent requests. Waiters block until a slot
  // frees; the bound holds however many threads share this judge.
  struct Gate {
    explicit Gate(RemoteJudge& judge) : judge_(judge) {
      std::unique_lock<std::mutex> lock(judge_.mu_);
      judge_.cv_.wait(lock, [&] { return judge_.inflight_ < judge_.cfg_.max_inflight; });
      ++judge_.inflight_;
    }
    ~Gate() {
      {
        std::lock_guard<std::mutex> lock(judge_.mu_);
        --judge_.inflight_;
      }
      judge_.cv_.notify_one();
    }
    RemoteJudge& judge_;
  };

  std::string post_with_retry(const std::string& body) {
    Gate gate(*this);
    std::string last_error = "no attempt made";
    int delay = cfg_.backoff_ms;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay = std::min(delay * 2, cfg_.backoff_cap_ms);
      }
      httplib::Client cli(base_);
      cli.set_connection_timeout(cfg_.timeout_s, 0);
      cli.set_read_timeout(cfg_.timeout_s, 0);
      httplib::Headers headers;
      if (!cfg_.token.empty()) headers.emplace("Authorization", "Bearer " + cfg_.token);
      auto res = cli.Post(path_, headers, body, "application/json");
      if (!res) {
        last_error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {  // transient server failure
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        fail(Err::JudgeUnavailable, "judge rejected request with status " +
                                        std::to_string(res->status));
      return res->body;
    }
    fail(Err::JudgeUnavailable, "judge unreachable after " + std::to_string(cfg_.max_retries + 1) +
                                    " attempts (" + last_error + ")");
  }

  static JudgeVerdict parse_reply(const std::string& body, std::size_t n) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("extracted") || !j.contains("verdicts"))
      fail(Err::JudgeUnavailable, "malformed judge reply");
    const json& ex = j["extracted"];
    const json& vd = j["verdicts"];
    if (!ex.is_array() || !vd.is_array() || ex.size() != n || vd.size() != n)
      fail(Err::JudgeUnavailable, "judge reply arity mismatch");
    JudgeVerdict v;
    for (std::size_t i = 0; i < n; ++i) {
      if (ex[i].is_null())
        v.extracted.push_back(std::nullopt);
      else if (ex[i].is_string())
        v.extracted.push_back(ex[i].get<std::string>());
      else
        fail(Err::JudgeUnavailable, "judge reply extraction must be string or null");
      if (!vd[i].is_boolean()) fail(Err::JudgeUnavailable, "judge reply verdict must be boolean");
      v.verdicts.push_back(vd[i].get<bool>());
    }
    return v;
  }

  RemoteJudgeConfig cfg_;
  std::string base_;
  std::string path_;
  std::mutex mu_;
  std::condition_variable cv_;
  int inflight_ = 0;
};

// Serves the rule-based judge over the same wire contract; the remote
// adapter's integration tests and local judge deployments both use it.
inline void answer_judge_handler(const httplib::Request& req, httplib::Response& res) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.contains("questions") || !j.contains("gold") ||
      !j.contains("response_text")) {
    res.status = 400;
    return;
  }
  std::vector<std::string> questions = j["questions"].get<std::vector<std::string>>();
  std::vector<Answer> gold;
  for (const auto& g : j["gold"]) gold.push_back(answer_from_json(g));
  RuleJudge rule;
  JudgeVerdict v = rule.judge(questions, gold, j["response_text"].get<std::string>());
  json out;
  out["extracted"] = json::array();
  for (const auto& e : v.extracted)
    out["extracted"].push_back(e ? json(*e) : json(nullptr));
  out["verdicts"] = v.verdicts;
  res.set_content(out.dump(), "application/json");
}

}  // namespace pqa
