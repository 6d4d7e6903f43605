// pqa: command-line front end for the perceptqa library.
//
// Subcommands: gen, assemble, validate, score, stats.
// Exit codes: 0 success, 1 validation/data failures, 2 usage errors.
// Every run logs its effective configuration (and seed, where one applies)
// to standard error; artifacts go only to the requested output paths.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <perceptqa/dataset.hpp>
#include <perceptqa/generator.hpp>
#include <perceptqa/remote_judge.hpp>
#include <perceptqa/reward.hpp>

namespace fs = std::filesystem;
using namespace pqa;

namespace {

RasterSpec parse_raster(const std::string& s) {
  auto x = s.find('x');
  RasterSpec r;
  r.width = std::stoi(s.substr(0, x));
  r.height = std::stoi(s.substr(x + 1));
  return r;
}

// Flag-level check so malformed raster sizes surface as usage errors.
std::string raster_flag_error(std::string& s) {
  auto x = s.find('x');
  if (x == std::string::npos || x == 0 || x + 1 == s.size()) return "expected WxH, got '" + s + "'";
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != x && !std::isdigit(static_cast<unsigned char>(s[i])))
      return "expected WxH, got '" + s + "'";
  long w = std::stol(s.substr(0, x));
  long h = std::stol(s.substr(x + 1));
  if (w * h < kMinImagePixels || w * h > kMaxImagePixels)
    return "raster " + s + " holds " + std::to_string(w * h) + " pixels, outside [" +
           std::to_string(kMinImagePixels) + ", " + std::to_string(kMaxImagePixels) + "]";
  return "";
}

DatasetSpec load_spec(const std::string& name) {
  if (name == "paper-defaults") return DatasetSpec::paper_defaults();
  if (name == "paper-synthetic") return DatasetSpec::paper_synthetic();
  std::ifstream in(name, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot open spec file '" + name + "'");
  try {
    return spec_from_json(json::parse(in));
  } catch (const json::exception& e) {
    fail(Err::SpecInvalid, "spec file '" + name + "': " + e.what());
  }
}

int run_gen(const GenConfig& cfg, const fs::path& out) {
  std::cerr << "[pqa gen] seed=" << cfg.seed << " count=" << cfg.count << " raster="
            << cfg.raster.width << "x" << cfg.raster.height << " svg=" << (cfg.write_svg ? "on" : "off")
            << " max_questions=" << cfg.max_questions << " out=" << out.string() << "\n";
  std::vector<Sample> samples = run_generation(cfg, out);
  std::size_t questions = 0;
  for (const auto& s : samples) questions += s.qas.size();
  std::cerr << "[pqa gen] wrote " << samples.size() << " samples, " << questions
            << " questions under " << out.string() << "\n";
  return 0;
}

int run_assemble(const DatasetSpec& spec, const fs::path& pool, const fs::path& out) {
  std::cerr << "[pqa assemble] spec=" << spec_to_json(spec).dump() << " pool=" << pool.string()
            << " out=" << out.string() << "\n";
  std::vector<Sample> samples = read_samples_jsonl(pool / "samples.jsonl");
  DatasetStats stats = assemble(spec, std::move(samples), pool, out);
  std::cout << render_stats(stats, spec);
  std::cerr << "[pqa assemble] wrote train=" << stats.train_samples << " test=" << stats.test_samples
            << " under " << out.string() << "\n";
  return 0;
}

int run_validate(const fs::path& dir) {
  std::cerr << "[pqa validate] dir=" << dir.string() << "\n";
  std::vector<std::string> violations;
  auto flag = [&](const std::string& where, const std::string& what) {
    violations.push_back(where + ": " + what);
  };

  std::vector<Sample> samples;
  std::set<std::string> ids;
  bool any_file = false;
  for (const char* name : {"samples.jsonl", "train.jsonl", "test.jsonl"}) {
    fs::path file = dir / name;
    if (!fs::exists(file)) continue;
    any_file = true;
    try {
      for (auto& s : read_samples_jsonl(file)) {
        if (!ids.insert(s.id).second) flag(s.id, "duplicate sample id");
        samples.push_back(std::move(s));
      }
    } catch (const Error& e) {
      flag(name, e.what());
    }
  }
  if (!any_file) {
    std::cerr << "no sample files (samples.jsonl, train.jsonl, test.jsonl) under " << dir.string()
              << "\n";
    return 1;
  }

  std::size_t scenes = 0, questions = 0;
  for (const Sample& s : samples) {
    if (!fs::exists(dir / s.image_path)) flag(s.id, "missing image " + s.image_path);
    if (!s.scene_path) continue;
    fs::path scene_file = dir / *s.scene_path;
    std::ifstream in(scene_file, std::ios::binary);
    if (!in) {
      flag(s.id, "missing scene " + s.scene_path.value());
      continue;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Scene scene;
    try {
      scene = scene_from_text(text);
    } catch (const Error& e) {
      flag(s.id, std::string("scene parse: ") + e.what());
      continue;
    }
    ++scenes;
    ValidationReport rep = validate_scene(scene);
    for (const auto& v : rep.violations) flag(s.id, v.code + ": " + v.message);
    std::vector<Fact> facts = enumerate_facts(scene);
    for (const auto& qa : s.qas) {
      ++questions;
      VerifyReport vr = verify_qa(scene, facts, qa.question, answer_to_string(qa.answer));
      if (vr.status != VerifyStatus::Valid)
        flag(s.id, std::string(verify_status_name(vr.status)) + " for '" + qa.question +
                       "': " + vr.detail);
    }
  }

  constexpr std::size_t kMaxPrinted = 50;
  for (std::size_t i = 0; i < violations.size() && i < kMaxPrinted; ++i)
    std::cerr << "violation: " << violations[i] << "\n";
  if (violations.size() > kMaxPrinted)
    std::cerr << "... and " << violations.size() - kMaxPrinted << " more\n";
  std::cerr << "[pqa validate] checked " << samples.size() << " samples, " << scenes
            << " scenes, " << questions << " questions: " << violations.size() << " violations\n";
  return violations.empty() ? 0 : 1;
}

int run_score(const fs::path& test_file, const fs::path& responses_file, const std::string& mode,
              const std::string& judge_url, const std::string& judge_token,
              const fs::path& report_out) {
  std::cerr << "[pqa score] test=" << test_file.string() << " responses=" << responses_file.string()
            << " judge=" << mode << "\n";
  std::vector<Sample> test = read_samples_jsonl(test_file);
  std::map<std::string, std::string> responses = read_responses_jsonl(responses_file);

  AccuracyReport rep;
  if (mode == "remote") {
    RemoteJudgeConfig cfg = RemoteJudgeConfig::from_env();
    if (!judge_url.empty()) cfg.url = judge_url;
    if (!judge_token.empty()) cfg.token = judge_token;
    RemoteJudge judge(cfg);
    rep = evaluate_accuracy(test, responses, judge);
  } else {
    rep = evaluate_accuracy(test, responses);
  }

  std::cout << render_accuracy(rep);
  if (!report_out.empty()) {
    std::ofstream out(report_out, std::ios::binary);
    if (!out) fail(Err::IoError, "cannot write report " + report_out.string());
    out << accuracy_to_json(rep).dump(2) << '\n';
    std::cerr << "[pqa score] report written to " << report_out.string() << "\n";
  }
  return 0;
}

int run_stats(const fs::path& dir, const DatasetSpec& spec, bool as_json) {
  std::cerr << "[pqa stats] dir=" << dir.string() << " baseline=" << spec_to_json(spec).dump()
            << "\n";
  DatasetStats stats = stats_report(dir, spec);
  if (as_json)
    std::cout << stats_to_json(stats).dump(2) << '\n';
  else
    std::cout << render_stats(stats, spec);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perceptqa: deterministic geometric perception QA datasets"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file (flags take precedence)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate annotated scenes, images, and QA samples")->configurable();
  GenConfig gen_cfg;
  gen_cfg.seed = 42;
  std::string gen_out, raster_str = "640x640";
  bool no_svg = false;
  gen->add_option("--seed", gen_cfg.seed, "Master seed")->capture_default_str();
  gen->add_option("--count", gen_cfg.count, "Number of samples to generate")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--raster", raster_str, "Raster size as WxH")
      ->capture_default_str()
      ->check(CLI::Validator(raster_flag_error, "WxH"));
  gen->add_flag("--no-svg", no_svg, "Skip vector output");
  gen->add_option("--max-questions", gen_cfg.max_questions, "Upper bound on QAs per sample")
      ->capture_default_str()
      ->check(CLI::Range(1, kMaxQuestionsPerSample));

  // assemble
  auto* assemble_cmd = app.add_subcommand("assemble", "Assemble a train/test dataset from a pool")->configurable();
  std::string spec_name = "paper-defaults", pool_dir, assemble_out;
  std::uint64_t assemble_seed = 0;
  int train_n = 0, test_n = 0, image_total = 0, question_total = 0;
  double all_yes_cap = 0.2;
  assemble_cmd->add_option("--spec", spec_name,
                           "paper-defaults, paper-synthetic, or a JSON spec file")
      ->capture_default_str();
  assemble_cmd->add_option("--pool", pool_dir, "Pool directory (defaults to --out)");
  assemble_cmd->add_option("--out", assemble_out, "Output directory")->required();
  auto* seed_opt = assemble_cmd->add_option("--seed", assemble_seed, "Override spec seed");
  auto* train_opt = assemble_cmd->add_option("--train-n", train_n, "Override train size")
                        ->check(CLI::NonNegativeNumber);
  auto* test_opt = assemble_cmd->add_option("--test-n", test_n, "Override test size")
                       ->check(CLI::NonNegativeNumber);
  auto* cap_opt = assemble_cmd->add_option("--all-yes-cap", all_yes_cap,
                                           "Max fraction of all-yes samples")
                      ->check(CLI::Range(0.0, 1.0));
  auto* img_opt = assemble_cmd->add_option("--image-total", image_total,
                                           "Exact-totals mode: image count")
                      ->check(CLI::PositiveNumber);
  auto* q_opt = assemble_cmd->add_option("--question-total", question_total,
                                         "Exact-totals mode: question count")
                    ->check(CLI::PositiveNumber);

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check scenes and QAs in a directory")->configurable();
  std::string validate_dir;
  validate_cmd->add_option("--dir", validate_dir, "Pool or dataset directory")->required();

  // score
  auto* score_cmd = app.add_subcommand("score", "Score model responses against a test split")->configurable();
  std::string test_file, responses_file, judge_mode = "rules", judge_url, judge_token, report_out;
  score_cmd->add_option("--test", test_file, "Test split JSONL")->required();
  score_cmd->add_option("--responses", responses_file, "Responses JSONL")->required();
  score_cmd->add_option("--judge", judge_mode, "Answer judge")
      ->capture_default_str()
      ->check(CLI::IsMember({"rules", "remote"}));
  score_cmd->add_option("--judge-url", judge_url, "Remote judge endpoint (default $PQA_JUDGE_URL)");
  score_cmd->add_option("--judge-token", judge_token,
                        "Remote judge bearer token (default $PQA_JUDGE_TOKEN)");
  score_cmd->add_option("--out", report_out, "Write a JSON report here");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Report distribution statistics for a dataset")->configurable();
  std::string stats_dir, stats_spec = "paper-defaults";
  bool stats_json = false;
  stats_cmd->add_option("--dir", stats_dir, "Dataset directory")->required();
  stats_cmd->add_option("--spec", stats_spec, "Baseline spec for deviation columns")
      ->capture_default_str();
  stats_cmd->add_flag("--json", stats_json, "Emit JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      gen_cfg.raster = parse_raster(raster_str);
      gen_cfg.write_svg = !no_svg;
      return run_gen(gen_cfg, gen_out);
    }
    if (*assemble_cmd) {
      DatasetSpec spec = load_spec(spec_name);
      if (seed_opt->count()) spec.seed = assemble_seed;
      if (train_opt->count()) spec.train_n = train_n;
      if (test_opt->count()) spec.test_n = test_n;
      if (cap_opt->count()) spec.all_yes_cap = all_yes_cap;
      if (img_opt->count()) spec.image_total = image_total;
      if (q_opt->count()) spec.question_total = question_total;
      fs::path pool = pool_dir.empty() ? fs::path(assemble_out) : fs::path(pool_dir);
      return run_assemble(spec, pool, assemble_out);
    }
    if (*validate_cmd) return run_validate(validate_dir);
    if (*score_cmd)
      return run_score(test_file, responses_file, judge_mode, judge_url, judge_token, report_out);
    if (*stats_cmd) return run_stats(stats_dir, load_spec(stats_spec), stats_json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
