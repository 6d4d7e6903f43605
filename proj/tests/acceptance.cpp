// Acceptance gate: exercises the shipped artifacts end to end and prints one
// pass/fail line per criterion. Exit code 0 iff every criterion passes.
//
//  1. paper-defaults assembly over a >=6,079-sample pool reproduces the
//     questions-per-sample shares within 1.5 pp with an exact (5420, 659)
//     split, inside a 600 s budget.
//  2. synthetic-only assembly hits 2,872 images / 9,303 questions exactly;
//     mean questions per image within 0.05 of 3.239.
//  3. 10,000 generated (scene, QA) pairs all verify Valid; no sample holds
//     more than 7 questions.
//  4. geometry battery: dense-sampling intersection oracle on 1,000 random
//     pairs, relation symmetry, rigid invariance, tolerance monotonicity.
//  5. strict reward equals the conjunction over all 2^n match vectors
//     (n <= 7); an always-"yes" adversary scores 0% sample-level on the
//     assembled test split (all-yes cap 0.2).
//  6. two same-seed gen+assemble runs emit byte-identical trees, PNG and
//     SVG bytes included.
//  7. SVG coordinate round-trip error <= 1e-6 on 100 scenes; every raster's
//     pixel count lies in [65536, 1048576].
//
// The driven CLI binary comes from $PQA_CLI (falls back to ./pqa).

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <perceptqa/dataset.hpp>
#include <perceptqa/qa.hpp>
#include <perceptqa/remote_judge.hpp>
#include <perceptqa/reward.hpp>
#include <perceptqa/svg.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace pqa;

namespace {

// Pinned tolerances and targets.
constexpr double kShareTolPp = 1.5;
constexpr int kTrainTarget = 5420;
constexpr int kTestTarget = 659;
constexpr double kAssemblyBudgetSec = 600.0;
constexpr int kSyntheticImages = 2872;
constexpr int kSyntheticQuestions = 9303;
constexpr double kMeanTarget = 3.239;
constexpr double kMeanTol = 0.05;
constexpr int kVerifyPairs = 10000;
constexpr int kOraclePairs = 1000;
constexpr double kRoundTripTol = 1e-6;
constexpr long kPixelsLo = 65536;
constexpr long kPixelsHi = 1048576;

constexpr int kPoolCount = 12000;
constexpr std::uint64_t kPoolSeed = 20260818;

std::string g_cli;
fs::path g_work;
int g_log_idx = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool g_all_pass = true;

void report(int idx, const char* name, const Outcome& o) {
  std::ostringstream line;
  line << "[" << idx << "] " << name << " ";
  while (line.str().size() < 44) line << '.';
  line << ' ' << (o.pass ? "PASS" : "FAIL");
  if (!o.detail.empty()) line << "  (" << o.detail << ")";
  std::cout << line.str() << "\n" << std::flush;
  g_all_pass = g_all_pass && o.pass;
}

int run_cli(const std::string& args, const std::string& step) {
  fs::path log = g_work / "logs" / (std::to_string(++g_log_idx) + "_" + step + ".log");
  std::string cmd = g_cli + " " + args + " >" + log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc == -1 || !WIFEXITED(rc)) return -1;
  return WEXITSTATUS(rc);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string fmt(double v, int prec = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

// ===== criterion 1 =====

std::array<double, 5> bucket_shares(const std::vector<Sample>& samples) {
  std::array<double, 5> shares{};
  for (const auto& s : samples) ++shares[std::min<std::size_t>(s.qas.size(), 5) - 1];
  for (double& v : shares) v = 100.0 * v / static_cast<double>(samples.size());
  return shares;
}

Outcome criterion1(bool& pool_ok, bool& paper_ds_ok) {
  auto t0 = std::chrono::steady_clock::now();
  if (run_cli("gen --seed " + std::to_string(kPoolSeed) + " --count " + std::to_string(kPoolCount) +
                  " --out " + (g_work / "pool").string(),
              "gen_pool") != 0)
    return {false, "pool generation failed, see logs"};
  pool_ok = true;
  if (run_cli("assemble --spec paper-defaults --seed 4242 --pool " + (g_work / "pool").string() +
                  " --out " + (g_work / "ds_paper").string(),
              "assemble_paper") != 0)
    return {false, "assembly failed, see logs"};
  double elapsed = seconds_since(t0);

  std::vector<Sample> train = read_samples_jsonl(g_work / "ds_paper" / "train.jsonl");
  std::vector<Sample> test = read_samples_jsonl(g_work / "ds_paper" / "test.jsonl");
  paper_ds_ok = true;
  if (static_cast<int>(train.size()) != kTrainTarget || static_cast<int>(test.size()) != kTestTarget)
    return {false, "split " + std::to_string(train.size()) + "/" + std::to_string(test.size()) +
                       ", want 5420/659"};

  std::vector<Sample> all = train;
  all.insert(all.end(), test.begin(), test.end());
  std::array<double, 5> shares = bucket_shares(all);
  double worst = 0;
  for (std::size_t k = 0; k < 5; ++k)
    worst = std::max(worst, std::abs(shares[k] - kReferenceCountShares[k]));
  if (worst > kShareTolPp)
    return {false, "bucket share deviation " + fmt(worst) + "pp > " + fmt(kShareTolPp) + "pp"};
  if (elapsed >= kAssemblyBudgetSec)
    return {false, "took " + fmt(elapsed, 1) + "s >= " + fmt(kAssemblyBudgetSec, 0) + "s"};
  return {true, "6079 samples; max share dev " + fmt(worst) + "pp; split 5420/659; " +
                    fmt(elapsed, 1) + "s"};
}

// ===== criterion 2 =====

Outcome criterion2(bool pool_ok) {
  if (!pool_ok) return {false, "no pool (criterion 1 setup failed)"};
  if (run_cli("assemble --spec paper-synthetic --seed 777 --pool " + (g_work / "pool").string() +
                  " --out " + (g_work / "ds_syn").string(),
              "assemble_synthetic") != 0)
    return {false, "assembly failed, see logs"};
  std::vector<Sample> train = read_samples_jsonl(g_work / "ds_syn" / "train.jsonl");
  std::vector<Sample> test = read_samples_jsonl(g_work / "ds_syn" / "test.jsonl");
  int images = static_cast<int>(train.size() + test.size());
  long questions = 0;
  for (const auto& s : train) questions += static_cast<long>(s.qas.size());
  for (const auto& s : test) questions += static_cast<long>(s.qas.size());
  for (const auto& s : train)
    if (s.source != "synthetic") return {false, "non-synthetic sample " + s.id};
  if (images != kSyntheticImages || questions != kSyntheticQuestions)
    return {false, std::to_string(images) + " images / " + std::to_string(questions) +
                       " questions, want 2872/9303"};
  double mean = static_cast<double>(questions) / images;
  if (std::abs(mean - kMeanTarget) > kMeanTol)
    return {false, "mean " + fmt(mean, 3) + " off " + fmt(kMeanTarget, 3) + " by > " + fmt(kMeanTol)};
  return {true, "2872 images / 9303 questions; mean " + fmt(mean, 3)};
}

// ===== criterion 3 =====

Outcome criterion3(bool pool_ok) {
  if (!pool_ok) return {false, "no pool (criterion 1 setup failed)"};
  std::vector<Sample> pool = read_samples_jsonl(g_work / "pool" / "samples.jsonl");
  int pairs = 0, invalid = 0, oversized = 0;
  std::string first_bad;
  for (const Sample& s : pool) {
    if (s.qas.size() > 7) ++oversized;
    if (pairs >= kVerifyPairs) continue;
    Scene scene = scene_from_text(read_file(g_work / "pool" / *s.scene_path));
    std::vector<Fact> facts = enumerate_facts(scene);
    for (const auto& qa : s.qas) {
      if (pairs >= kVerifyPairs) break;
      ++pairs;
      VerifyReport vr = verify_qa(scene, facts, qa.question, answer_to_string(qa.answer));
      if (vr.status != VerifyStatus::Valid) {
        ++invalid;
        if (first_bad.empty())
          first_bad = s.id + " '" + qa.question + "': " + verify_status_name(vr.status);
      }
    }
  }
  if (pairs < kVerifyPairs)
    return {false, "only " + std::to_string(pairs) + " pairs available"};
  if (oversized > 0) return {false, std::to_string(oversized) + " samples exceed 7 questions"};
  if (invalid > 0)
    return {false, std::to_string(invalid) + "/" + std::to_string(pairs) + " invalid; first: " +
                       first_bad};
  return {true, std::to_string(pairs) + " pairs Valid; 0 oversized samples"};
}

// ===== criterion 4 =====

Transform random_rigid(Rng& rng) {
  switch (rng.uniform_int(0, 2)) {
    case 0: return make_translation(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
    case 1:
      return make_rotation(rng.uniform(0.0, 360.0), {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    default:
      return make_reflection({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)},
                             {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
  }
}

Outcome criterion4() {
  Tolerance tol{1e-9, 0.5};
  Rng rng(0xACCE9);

  // Brute-force intersection oracle.
  int compared = 0, mismatches = 0;
  for (int i = 0; i < kOraclePairs; ++i) {
    Shape a = oracles::random_shape(rng);
    Shape b = oracles::random_shape(rng);
    oracles::OracleResult expect = oracles::dense_intersections(a, b);
    if (expect.ambiguous) continue;
    ++compared;
    IntersectionResult got = intersection_count(a, b, tol);
    if (got.infinite != expect.infinite) {
      ++mismatches;
      continue;
    }
    if (expect.infinite) continue;
    if (got.points.size() != expect.points.size()) {
      ++mismatches;
      continue;
    }
    for (const Point& p : expect.points) {
      double best = 1e9;
      for (const Point& q : got.points) best = std::min(best, distance(p, q));
      if (best >= 1e-6) {
        ++mismatches;
        break;
      }
    }
  }
  if (mismatches > 0 || compared < kOraclePairs / 2)
    return {false, std::to_string(mismatches) + " oracle mismatches over " +
                       std::to_string(compared) + " unambiguous pairs"};

  // Relation symmetry on random pairs: the verdict must flip operands
  // freely, and pairs a relation rejects must be rejected both ways.
  auto try_holds = [&](RelationKind k, const Shape& x, const Shape& y) -> std::optional<bool> {
    try {
      return relation_holds(k, x, y, tol);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  int sym_bad = 0;
  for (int i = 0; i < 400; ++i) {
    Shape a = oracles::random_shape(rng);
    Shape b = oracles::random_shape(rng);
    for (RelationKind k : {RelationKind::Parallel, RelationKind::Perpendicular,
                           RelationKind::Intersect, RelationKind::Congruent, RelationKind::Similar})
      if (try_holds(k, a, b) != try_holds(k, b, a)) ++sym_bad;
  }
  if (sym_bad > 0) return {false, std::to_string(sym_bad) + " symmetry violations"};

  // Rigid invariance: congruence and similarity survive rigid motion.
  int rigid_bad = 0;
  for (int i = 0; i < 200; ++i) {
    Shape a = oracles::random_triangle_shape(rng);
    Shape moved = apply_transform(a, random_rigid(rng));
    Tolerance loose{1e-7, 0.5};
    if (!relation_holds(RelationKind::Congruent, a, moved, loose)) ++rigid_bad;
    if (!relation_holds(RelationKind::Similar, a, moved, loose)) ++rigid_bad;
    Shape scaled = apply_transform(a, make_scale(1.7, {0.5, 0.5}));
    if (relation_holds(RelationKind::Congruent, a, scaled, loose)) ++rigid_bad;
  }
  if (rigid_bad > 0) return {false, std::to_string(rigid_bad) + " rigid-invariance violations"};

  // Tolerance monotonicity: anything parallel under a tight angle budget
  // stays parallel when the budget grows.
  int mono_bad = 0;
  for (int i = 0; i < 400; ++i) {
    Shape a = oracles::random_segment_shape(rng);
    Shape b = oracles::random_segment_shape(rng);
    for (RelationKind k : {RelationKind::Parallel, RelationKind::Perpendicular}) {
      bool tight_holds = relation_holds(k, a, b, Tolerance{1e-9, 0.25});
      bool loose_holds = relation_holds(k, a, b, Tolerance{1e-9, 2.0});
      if (tight_holds && !loose_holds) ++mono_bad;
    }
  }
  if (mono_bad > 0) return {false, std::to_string(mono_bad) + " monotonicity violations"};

  return {true, std::to_string(compared) + " oracle pairs agree; symmetry, rigidity, " +
                    "monotonicity clean"};
}

// ===== criterion 5 =====

Outcome criterion5(bool paper_ds_ok) {
  // Exhaustive strictness.
  for (int n = 1; n <= 7; ++n) {
    PerceptionInput input;
    input.instruction = "Answer.";
    std::vector<Answer> gold;
    for (int i = 1; i <= n; ++i) {
      input.questions.push_back("q" + std::to_string(i));
      gold.push_back(Answer::number(10 * i));
    }
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
      std::string resp = "Answers:";
      for (int i = 1; i <= n; ++i)
        resp += " " + std::to_string(i) + ". " +
                std::to_string(((bits >> (i - 1)) & 1u) ? 10 * i : 10 * i + 5);
      RewardRecord rec = score_strict(input, resp, gold);
      bool want = bits == (1u << n) - 1;
      bool conj = true;
      for (int i = 0; i < n; ++i) conj = conj && rec.matches[static_cast<std::size_t>(i)];
      if (rec.reward != (want ? 1 : 0) || conj != want)
        return {false, "strictness broken at n=" + std::to_string(n) + " bits=" +
                           std::to_string(bits)};
    }
  }

  if (!paper_ds_ok) return {false, "exhaustive ok, but no assembled test split to attack"};
  std::vector<Sample> test = read_samples_jsonl(g_work / "ds_paper" / "test.jsonl");
  std::map<std::string, std::string> adversary;
  for (const auto& s : test)
    adversary[s.id] = "Answers: 1. yes 2. yes 3. yes 4. yes 5. yes 6. yes 7. yes";
  AccuracyReport rep = evaluate_accuracy(test, adversary);
  if (rep.sample_accuracy != 0.0)
    return {false, "always-yes adversary scored " + fmt(100 * rep.sample_accuracy) +
                       "% on the test split"};
  return {true, "2^n sweep exact for n<=7; adversary 0% over " + std::to_string(test.size()) +
                    " test samples"};
}

// ===== criterion 6 =====

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file())
      out[fs::relative(entry.path(), root).string()] = read_file(entry.path());
  return out;
}

Outcome criterion6() {
  for (const char* run : {"det_a", "det_b"}) {
    fs::path dir = g_work / run;
    if (run_cli("gen --seed 99 --count 240 --out " + dir.string(), "gen_det") != 0)
      return {false, "generation failed, see logs"};
    if (run_cli("assemble --seed 99 --train-n 100 --test-n 12 --pool " + dir.string() + " --out " +
                    (dir / "ds").string(),
                "assemble_det") != 0)
      return {false, "assembly failed, see logs"};
  }
  auto a = read_tree(g_work / "det_a");
  auto b = read_tree(g_work / "det_b");
  if (a.size() != b.size())
    return {false, "tree sizes differ: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + " files"};
  for (const auto& [path, bytes] : a) {
    auto it = b.find(path);
    if (it == b.end()) return {false, "file only in first run: " + path};
    if (it->second != bytes) return {false, "bytes differ: " + path};
  }
  return {true, std::to_string(a.size()) + " files byte-identical across runs"};
}

// ===== criterion 7 =====

double attr_after(const std::string& svg, std::size_t from, const std::string& name) {
  std::string key = name + "=\"";
  std::size_t i = svg.find(key, from);
  if (i == std::string::npos) return 1e18;
  i += key.size();
  return std::stod(svg.substr(i, svg.find('"', i) - i));
}

std::vector<std::size_t> find_all(const std::string& hay, const std::string& needle) {
  std::vector<std::size_t> out;
  for (std::size_t i = hay.find(needle); i != std::string::npos; i = hay.find(needle, i + 1))
    out.push_back(i);
  return out;
}

// Largest distance between a scene coordinate and its value read back out of
// the SVG text; 1e18 on any structural mismatch.
double svg_roundtrip_error(const Scene& scene, const std::string& svg) {
  Mapper map = mapper_for(kSvgView, kSvgView);
  auto lines = find_all(svg, "<line ");
  auto circles = find_all(svg, "<circle ");
  auto polys = find_all(svg, "<polygon ");
  std::size_t li = 0, ci = 0, pi = 0;
  double worst = 0;
  auto track = [&](Point got, Point want) { worst = std::max(worst, distance(got, want)); };
  for (const Shape& s : scene.shapes) {
    if (const auto* seg = std::get_if<Segment>(&s.geom)) {
      if (li >= lines.size()) return 1e18;
      std::size_t at = lines[li++];
      track(map.from_px({attr_after(svg, at, "x1"), attr_after(svg, at, "y1")}), seg->a);
      track(map.from_px({attr_after(svg, at, "x2"), attr_after(svg, at, "y2")}), seg->b);
    } else if (const auto* c = std::get_if<Circle>(&s.geom)) {
      if (ci >= circles.size()) return 1e18;
      std::size_t at = circles[ci++];
      track(map.from_px({attr_after(svg, at, "cx"), attr_after(svg, at, "cy")}), c->center);
      worst = std::max(worst, std::abs(attr_after(svg, at, "r") / map.side - c->radius));
    } else {
      if (pi >= polys.size()) return 1e18;
      std::size_t at = svg.find("points=\"", polys[pi++]) + 8;
      std::size_t end = svg.find('"', at);
      std::string pts = svg.substr(at, end - at);
      std::vector<Point> got;
      std::size_t pos = 0;
      while (pos < pts.size()) {
        std::size_t comma = pts.find(',', pos);
        std::size_t space = pts.find(' ', comma);
        if (space == std::string::npos) space = pts.size();
        got.push_back(map.from_px({std::stod(pts.substr(pos, comma - pos)),
                                   std::stod(pts.substr(comma + 1, space - comma - 1))}));
        pos = space + 1;
      }
      const auto& want = std::get<Polygon>(s.geom).vertices;
      if (got.size() != want.size()) return 1e18;
      for (std::size_t i = 0; i < want.size(); ++i) track(got[i], want[i]);
    }
  }
  if (li != lines.size() || ci != circles.size() || pi != polys.size()) return 1e18;
  return worst;
}

std::uint32_t read_be32(const std::string& s, std::size_t at) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 3]));
}

Outcome criterion7(bool pool_ok) {
  if (!pool_ok) return {false, "no pool (criterion 1 setup failed)"};
  std::vector<Sample> pool = read_samples_jsonl(g_work / "pool" / "samples.jsonl");

  double worst = 0;
  int scenes = 0;
  for (const Sample& s : pool) {
    if (scenes >= 100) break;
    Scene scene = scene_from_text(read_file(g_work / "pool" / *s.scene_path));
    worst = std::max(worst, svg_roundtrip_error(scene, render_svg(scene)));
    ++scenes;
  }
  if (scenes < 100) return {false, "only " + std::to_string(scenes) + " scenes available"};
  if (worst > kRoundTripTol)
    return {false, "round-trip error " + fmt(worst, 9) + " > 1e-6"};

  long bad_pixels = 0, checked = 0;
  for (const Sample& s : pool) {
    std::ifstream in(g_work / "pool" / s.image_path, std::ios::binary);
    std::string head(24, '\0');
    in.read(head.data(), 24);
    if (in.gcount() != 24 || head.substr(12, 4) != "IHDR") {
      ++bad_pixels;
      continue;
    }
    long w = read_be32(head, 16), h = read_be32(head, 20);
    long px = w * h;
    if (px < kPixelsLo || px > kPixelsHi) ++bad_pixels;
    ++checked;
  }
  if (bad_pixels > 0)
    return {false, std::to_string(bad_pixels) + " rasters outside [65536, 1048576] px"};
  return {true, "100 scenes round-trip <= 1e-6 (worst " + fmt(worst, 9) + "); " +
                    std::to_string(checked) + " rasters in pixel bounds"};
}

}  // namespace

int main() {
  const char* cli_env = std::getenv("PQA_CLI");
  g_cli = cli_env ? cli_env : "./pqa";
  if (!fs::exists(g_cli)) {
    std::cerr << "CLI binary not found at '" << g_cli << "'; set PQA_CLI\n";
    return 1;
  }
  g_work = fs::temp_directory_path() / "pqa_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work / "logs");
  std::cout << "acceptance work dir: " << g_work.string() << "\n";

  bool pool_ok = false, paper_ds_ok = false;
  try {
    report(1, "distribution reproduction", criterion1(pool_ok, paper_ds_ok));
    report(2, "synthetic count reproduction", criterion2(pool_ok));
    report(3, "scene/QA self-consistency", criterion3(pool_ok));
    report(4, "geometry predicate soundness", criterion4());
    report(5, "strict-reward equivalence", criterion5(paper_ds_ok));
    report(6, "determinism", criterion6());
    report(7, "render fidelity", criterion7(pool_ok));
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << "\n";
    return 1;
  }
  return g_all_pass ? 0 : 1;
}
