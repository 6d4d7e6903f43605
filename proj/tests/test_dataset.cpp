#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <perceptqa/dataset.hpp>
#include <perceptqa/generator.hpp>

using namespace pqa;
namespace fs = std::filesystem;

namespace {

Sample mk_sample(const std::string& id, int nq, bool yes_only) {
  Sample s;
  s.id = id;
  s.image_path = "images/" + id + ".png";
  s.scene_path = "scenes/" + id + ".scene";
  for (int i = 0; i < nq; ++i) {
    PerceptionQA qa;
    qa.question = "Probe " + std::to_string(i) + " for " + id + "?";
    qa.category = static_cast<QuestionCategory>(i % kCategoryCount);
    qa.fact_id = "probe:" + std::to_string(i);
    if (yes_only) {
      qa.answer = Answer::yes_no(true);
    } else {
      switch (i % 4) {
        case 0: qa.answer = Answer::yes_no(false); break;
        case 1: qa.answer = Answer::number(12.5); break;
        case 2: qa.answer = Answer::word("AB", TokenForm::Segment); break;
        default: qa.answer = Answer::word("ABC", TokenForm::Angle); break;
      }
    }
    s.qas.push_back(qa);
  }
  return s;
}

std::vector<std::string> ids_of(const std::vector<Sample>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.id);
  return out;
}

// One shared generated pool keeps the filesystem-heavy cases fast.
const fs::path& pool_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "pqa_test_pool";
    fs::remove_all(d);
    GenConfig cfg;
    cfg.seed = 7001;
    cfg.count = 400;
    cfg.raster = {320, 240};
    run_generation(cfg, d);
    return d;
  }();
  return dir;
}

std::vector<Sample> pool_samples() { return read_samples_jsonl(pool_dir() / "samples.jsonl"); }

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = ss.str();
  }
  return files;
}

}  // namespace

TEST_CASE("all-yes downsampling hits the cap exactly on the worked example", "[dataset]") {
  std::vector<Sample> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(mk_sample("y" + std::to_string(i), 2, true));
  for (int i = 0; i < 60; ++i) pool.push_back(mk_sample("m" + std::to_string(i), 3, false));

  auto out = downsample_all_yes(pool, 0.2, 11);
  REQUIRE(out.size() == 75);
  int yes = 0;
  std::vector<std::string> mixed_ids;
  for (const auto& s : out)
    if (all_yes(s)) ++yes; else mixed_ids.push_back(s.id);
  REQUIRE(yes == 15);
  // Every non-all-yes sample survives, in its original order.
  std::vector<std::string> expected;
  for (int i = 0; i < 60; ++i) expected.push_back("m" + std::to_string(i));
  REQUIRE(mixed_ids == expected);

  auto again = downsample_all_yes(pool, 0.2, 11);
  REQUIRE(ids_of(again) == ids_of(out));
  auto other_seed = downsample_all_yes(pool, 0.2, 12);
  REQUIRE(other_seed.size() == out.size());
}

TEST_CASE("downsampling bounds the all-yes fraction for every cap", "[dataset]") {
  Rng rng(404);
  for (int round = 0; round < 30; ++round) {
    std::vector<Sample> pool;
    int n = rng.uniform_int(5, 160);
    for (int i = 0; i < n; ++i)
      pool.push_back(mk_sample("s" + std::to_string(i), rng.uniform_int(1, 7), rng.chance(0.4)));
    for (double cap : {0.0, 0.1, 0.2, 0.5, 1.0}) {
      auto out = downsample_all_yes(pool, cap, 99 + round);
      std::size_t yes = 0;
      for (const auto& s : out) yes += all_yes(s) ? 1 : 0;
      if (!out.empty())
        REQUIRE(static_cast<double>(yes) <= cap * static_cast<double>(out.size()) + 1e-9);
      // Mixed samples are never touched.
      std::size_t mixed_in = 0, mixed_out = out.size() - yes;
      for (const auto& s : pool) mixed_in += all_yes(s) ? 0 : 1;
      REQUIRE(mixed_out == mixed_in);
      if (cap == 1.0) REQUIRE(out.size() == pool.size());
    }
  }
  REQUIRE_THROWS_AS(downsample_all_yes({}, -0.1, 1), Error);
  REQUIRE_THROWS_AS(downsample_all_yes({}, 1.1, 1), Error);
}

TEST_CASE("splits are exact, disjoint, and stable as the train side grows", "[dataset]") {
  std::vector<Sample> pool;
  for (int i = 0; i < 120; ++i)
    pool.push_back(mk_sample("s" + std::to_string(1000 + i), 1 + i % 7, false));

  auto [train, test] = split_samples(pool, 80, 20, 5);
  REQUIRE(train.size() == 80);
  REQUIRE(test.size() == 20);
  auto train_id_list = ids_of(train);
  std::set<std::string> train_ids(train_id_list.begin(), train_id_list.end());
  for (const auto& s : test) REQUIRE(!train_ids.count(s.id));
  REQUIRE(std::is_sorted(train.begin(), train.end(),
                         [](const Sample& a, const Sample& b) { return a.id < b.id; }));

  auto [train2, test2] = split_samples(pool, 80, 20, 5);
  REQUIRE(ids_of(train2) == ids_of(train));
  REQUIRE(ids_of(test2) == ids_of(test));

  // Test membership is fixed by the seed alone.
  auto small = split_samples(pool, 10, 20, 5);
  REQUIRE(ids_of(small.second) == ids_of(test));
  for (const auto& id : ids_of(small.first)) REQUIRE(train_ids.count(id));

  auto empty_train = split_samples(pool, 0, 20, 5);
  REQUIRE(empty_train.first.empty());
  REQUIRE(ids_of(empty_train.second) == ids_of(test));

  REQUIRE_THROWS_MATCHES(split_samples(pool, 110, 20, 5), Error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("130")));
}

TEST_CASE("bucket targets apportion the share table exactly", "[dataset]") {
  auto spec = DatasetSpec::paper_defaults();
  auto targets = pqa::detail::bucket_targets(spec, 6079);
  int sum = 0;
  for (int t : targets) sum += t;
  REQUIRE(sum == 6079);
  for (int k = 0; k < 4; ++k) {
    double share = 100.0 * targets[static_cast<std::size_t>(k)] / 6079.0;
    REQUIRE(std::abs(share - spec.count_shares[static_cast<std::size_t>(k)]) < 0.02);
  }
  double plus = 100.0 * (targets[4] + targets[5] + targets[6]) / 6079.0;
  REQUIRE(std::abs(plus - spec.count_shares[4]) < 0.02);
  // The aggregated bucket splits 3:2:1 up to rounding.
  REQUIRE(std::abs(targets[4] - 3.0 * targets[6]) <= 3);
  REQUIRE(std::abs(targets[5] - 2.0 * targets[6]) <= 2);
}

TEST_CASE("generation emits a valid deterministic pool", "[dataset]") {
  auto samples = pool_samples();
  REQUIRE(samples.size() == 400);
  std::set<std::string> ids;
  for (const auto& s : samples) {
    REQUIRE(ids.insert(s.id).second);
    REQUIRE(s.source == "synthetic");
    REQUIRE(!s.qas.empty());
    REQUIRE(s.qas.size() <= 7);
    REQUIRE(s.scene_path.has_value());
    REQUIRE(fs::exists(pool_dir() / s.image_path));
    REQUIRE(fs::exists(pool_dir() / *s.scene_path));
  }
  REQUIRE(std::is_sorted(samples.begin(), samples.end(),
                         [](const Sample& a, const Sample& b) { return a.id < b.id; }));

  // Scene files parse and validate; the ids line up with the samples.
  for (int i : {0, 17, 399}) {
    std::ifstream in(pool_dir() / *samples[static_cast<std::size_t>(i)].scene_path);
    std::stringstream ss;
    ss << in.rdbuf();
    Scene scene = scene_from_text(ss.str());
    REQUIRE(validate_scene(scene).ok());
  }

  // A second run of the same config is byte-identical, file for file.
  GenConfig cfg;
  cfg.seed = 9090;
  cfg.count = 30;
  cfg.raster = {320, 240};
  fs::path a = fs::temp_directory_path() / "pqa_gen_a";
  fs::path b = fs::temp_directory_path() / "pqa_gen_b";
  fs::remove_all(a);
  fs::remove_all(b);
  run_generation(cfg, a);
  run_generation(cfg, b);
  auto ta = read_tree(a);
  auto tb = read_tree(b);
  REQUIRE(ta.size() == tb.size());
  REQUIRE(ta == tb);
  // And a different seed changes the content.
  cfg.seed = 9091;
  fs::remove_all(b);
  run_generation(cfg, b);
  REQUIRE(read_tree(b) != ta);
}

TEST_CASE("assembly matches the share table and isolates the test split", "[dataset]") {
  DatasetSpec spec;
  spec.seed = 31337;
  spec.train_n = 180;
  spec.test_n = 20;
  fs::path out = fs::temp_directory_path() / "pqa_asm";
  fs::remove_all(out);
  DatasetStats stats = assemble(spec, pool_samples(), pool_dir(), out);

  REQUIRE(stats.train_samples == 180);
  REQUIRE(stats.test_samples == 20);
  REQUIRE(stats.total_samples == 200);
  REQUIRE(stats.max_count_share_dev <= 1.5);
  REQUIRE(stats.all_yes_test_fraction == 0.0);
  REQUIRE(stats.all_yes_train_fraction <= spec.all_yes_cap + 0.05);
  REQUIRE(stats.per_source.count("synthetic"));
  REQUIRE(stats.per_source.at("synthetic").first == 200);

  for (const char* name : {"train.jsonl", "test.jsonl", "manifest.json", "stats.txt"})
    REQUIRE(fs::exists(out / name));

  auto train = read_samples_jsonl(out / "train.jsonl");
  auto test = read_samples_jsonl(out / "test.jsonl");
  REQUIRE(train.size() == 180);
  REQUIRE(test.size() == 20);
  for (const auto& s : test) REQUIRE(!all_yes(s));
  for (const auto& s : train) {
    REQUIRE(fs::exists(out / s.image_path));
    REQUIRE(fs::exists(out / *s.scene_path));
  }

  // The manifest echoes the DatasetSpec and the emitted-file statistics.
  std::ifstream mf(out / "manifest.json");
  json manifest = json::parse(mf);
  REQUIRE(manifest.at("format_version").get<int>() == 1);
  REQUIRE(manifest.at("spec").at("train_n").get<int>() == 180);
  REQUIRE(manifest.at("stats").at("total_samples").get<int>() == 200);
  REQUIRE(manifest.at("pipeline").get<std::string>().find("split last") != std::string::npos);

  // stats_report recomputes the same numbers from disk.
  DatasetStats again = stats_report(out, spec);
  REQUIRE(again.total_samples == stats.total_samples);
  REQUIRE(again.total_questions == stats.total_questions);
  REQUIRE(again.max_count_share_dev == Catch::Approx(stats.max_count_share_dev));

  // Re-assembly into a fresh directory is byte-identical.
  fs::path out2 = fs::temp_directory_path() / "pqa_asm2";
  fs::remove_all(out2);
  assemble(spec, pool_samples(), pool_dir(), out2);
  REQUIRE(read_tree(out2) == read_tree(out));
}

TEST_CASE("dataset lines re-serialize byte for byte", "[dataset]") {
  fs::path out = fs::temp_directory_path() / "pqa_asm";
  REQUIRE(fs::exists(out / "train.jsonl"));  // produced by the assembly case
  int checked = 0;
  for (const char* name : {"train.jsonl", "test.jsonl"}) {
    std::ifstream in(out / name, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      Sample s = sample_from_json(json::parse(line));
      REQUIRE(sample_to_json(s).dump() == line);
      ++checked;
    }
  }
  REQUIRE(checked == 200);
}

TEST_CASE("exact-totals mode realizes the requested counts", "[dataset]") {
  DatasetSpec spec;
  spec.seed = 21;
  spec.image_total = 120;
  spec.question_total = 389;  // mean 3.2417 per image
  spec.train_n = 120;
  spec.test_n = 0;
  fs::path out = fs::temp_directory_path() / "pqa_totals";
  fs::remove_all(out);
  DatasetStats stats = assemble(spec, pool_samples(), pool_dir(), out);
  REQUIRE(stats.total_samples == 120);
  REQUIRE(stats.total_questions == 389);
  REQUIRE(stats.mean_qas_per_sample == Catch::Approx(389.0 / 120.0));
  REQUIRE(stats.test_samples == 0);
}

TEST_CASE("infeasible assembly requests fail with per-bucket deficits", "[dataset]") {
  REQUIRE_THROWS_MATCHES(
      assemble_select(DatasetSpec::paper_defaults(), {}), Error,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("empty")));

  DatasetSpec spec;
  spec.seed = 1;
  spec.train_n = 300;
  spec.test_n = 50;
  std::vector<Sample> tiny;
  for (int i = 0; i < 100; ++i) tiny.push_back(mk_sample("t" + std::to_string(i), 1 + i % 7, false));
  try {
    assemble_select(spec, tiny);
    FAIL("expected InsufficientSamples");
  } catch (const Error& e) {
    REQUIRE(e.code() == Err::InsufficientSamples);
    REQUIRE(std::string(e.what()).find("need") != std::string::npos);
  }

  // All samples exist but cannot reach the question total.
  DatasetSpec totals;
  totals.seed = 1;
  totals.image_total = 100;
  totals.question_total = 700;
  totals.train_n = 100;
  totals.test_n = 0;
  REQUIRE_THROWS_AS(assemble_select(totals, tiny), Error);
}

TEST_CASE("spec validation rejects malformed targets", "[dataset]") {
  DatasetSpec bad_shares;
  bad_shares.count_shares = {10, 10, 10, 10, 10};
  REQUIRE_THROWS_AS(validate_spec(bad_shares), Error);

  DatasetSpec bad_cap;
  bad_cap.all_yes_cap = 1.5;
  REQUIRE_THROWS_AS(validate_spec(bad_cap), Error);

  DatasetSpec bad_split;
  bad_split.image_total = 100;
  bad_split.question_total = 300;
  bad_split.train_n = 90;
  bad_split.test_n = 0;
  REQUIRE_THROWS_AS(validate_spec(bad_split), Error);

  DatasetSpec bad_totals;
  bad_totals.image_total = 100;
  bad_totals.question_total = 701;
  bad_totals.train_n = 100;
  bad_totals.test_n = 0;
  REQUIRE_THROWS_AS(validate_spec(bad_totals), Error);

  REQUIRE_NOTHROW(validate_spec(DatasetSpec::paper_defaults()));
  REQUIRE_NOTHROW(validate_spec(DatasetSpec::paper_synthetic()));
}

TEST_CASE("corrupt dataset files carry file and line diagnostics", "[dataset]") {
  fs::path dir = fs::temp_directory_path() / "pqa_corrupt";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    out << body;
  };

  // A sample carrying nine questions violates the cap.
  json nine = sample_to_json(mk_sample("bad", 7, false));
  for (int i = 0; i < 2; ++i) nine["qas"].push_back(nine["qas"][0]);
  write("train.jsonl", nine.dump() + "\n");
  try {
    stats_report(dir);
    FAIL("expected CorruptDataset");
  } catch (const Error& e) {
    REQUIRE(e.code() == Err::CorruptDataset);
    REQUIRE(std::string(e.what()).find("train.jsonl:1") != std::string::npos);
  }

  write("train.jsonl", "not a record\n");
  REQUIRE_THROWS_MATCHES(
      stats_report(dir), Error,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("train.jsonl:1")));

  // Duplicate ids across the split files.
  Sample dup = mk_sample("dup", 3, false);
  write("train.jsonl", sample_to_json(dup).dump() + "\n");
  write("test.jsonl", sample_to_json(dup).dump() + "\n");
  REQUIRE_THROWS_MATCHES(
      stats_report(dir), Error,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("duplicate")));
}

TEST_CASE("statistics of a single sample concentrate in its bucket", "[dataset]") {
  std::vector<Sample> train = {mk_sample("only", 3, false)};
  DatasetStats st = compute_stats(train, {});
  REQUIRE(st.count_shares[2] == Catch::Approx(100.0));
  REQUIRE(st.count_shares[0] == 0.0);
  REQUIRE(st.count_shares[4] == 0.0);
  REQUIRE(st.mean_qas_per_sample == Catch::Approx(3.0));
  REQUIRE(st.per_source.at("synthetic").second == 3);

  std::string table = render_stats(st, DatasetSpec::paper_defaults());
  REQUIRE(table.find("Questions per sample") != std::string::npos);
  REQUIRE(table.find("100.00") != std::string::npos);
}
