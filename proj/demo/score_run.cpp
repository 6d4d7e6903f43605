// Scores two synthetic policies against a freshly generated mini dataset:
// an oracle that answers every question from the scene facts, and an
// adversary that answers "yes" across the board. The strict all-or-nothing
// reward gives the oracle 100% and the adversary 0% at sample level once
// all-yes samples are downsampled.

#include <filesystem>
#include <iostream>

#include <perceptqa/dataset.hpp>
#include <perceptqa/generator.hpp>
#include <perceptqa/reward.hpp>

using namespace pqa;

int main() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "pqa_score_demo";
  fs::remove_all(dir);

  GenConfig gen;
  gen.seed = 99;
  gen.count = 120;
  gen.write_svg = false;
  gen.raster = {320, 320};
  std::cout << "generating " << gen.count << " samples...\n";
  std::vector<Sample> pool = run_generation(gen, dir / "pool");

  DatasetSpec spec;
  spec.seed = 99;
  spec.train_n = 60;
  spec.test_n = 12;
  AssembledDataset ds = assemble_select(spec, pool);
  std::cout << "assembled train=" << ds.train.size() << " test=" << ds.test.size() << "\n\n";

  std::map<std::string, std::string> oracle, adversary;
  for (const Sample& s : ds.test) {
    std::string answers = "Answers:";
    std::string yes = "Answers:";
    for (std::size_t i = 0; i < s.qas.size(); ++i) {
      answers += " " + std::to_string(i + 1) + ". " + answer_to_string(s.qas[i].answer);
      yes += " " + std::to_string(i + 1) + ". yes";
    }
    oracle[s.id] = answers;
    adversary[s.id] = yes;
  }

  std::cout << "=== oracle policy ===\n" << render_accuracy(evaluate_accuracy(ds.test, oracle));
  std::cout << "\n=== always-yes policy ===\n"
            << render_accuracy(evaluate_accuracy(ds.test, adversary));

  // The same verdicts drive the per-rollout reward used during training.
  const Sample& s = ds.test.front();
  PerceptionInput input;
  input.instruction = "Answer the questions about the figure.";
  std::vector<Answer> gold;
  for (const auto& qa : s.qas) {
    input.questions.push_back(qa.question);
    gold.push_back(qa.answer);
  }
  std::cout << "\nprompt for " << s.id << ":\n" << format_prompt(input);
  RewardRecord r = score_strict(input, oracle[s.id], gold);
  std::cout << "\noracle reward: " << r.reward << " (parse: " << r.parse_status << ")\n";
  r = score_strict(input, adversary[s.id], gold);
  std::cout << "adversary reward: " << r.reward << "\n";
  for (const auto& why : r.mismatch_reasons) std::cout << "  " << why << "\n";
  return 0;
}
