#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ratt/engine/run_trace.hpp"
#include "ratt/engine/templates.hpp"
#include "ratt/eval/game24.hpp"

namespace ratt {

enum class EvalTask { game24, similarity, codegen };

std::string_view to_string(EvalTask task);
EvalTask eval_task_from_string(std::string_view name);

struct InstanceOutcome {
  std::size_t index = 0;
  std::string label;
  std::vector<std::string> answers;  // one per attempt; empty string for failed attempts
  std::size_t attempts = 0;
  std::size_t correct = 0;
  std::optional<double> bleu;
  std::optional<double> rouge_l;
  std::vector<std::string> errors;

  bool success() const { return correct > 0; }
};

struct EvalReport {
  std::string method;
  std::string dataset;
  EvalTask task = EvalTask::game24;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::size_t> ks{1};  // pass@k sizes reported
  std::vector<InstanceOutcome> outcomes;
  // Derived from outcomes by recompute(), in display order.
  std::vector<std::pair<std::string, double>> metrics;

  /// success_rate (percent) and pass@k for game24 and codegen, bleu and
  /// rouge_l means for similarity. pass@k sizes above an instance's
  /// attempt count are skipped.
  void recompute();
  std::optional<double> metric(std::string_view name) const;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& doc);
};

/// Runs one method on one prompt. May throw RunError.
using MethodRunner = std::function<RunTrace(const TaskPrompt&)>;
/// Receives every trace produced, including partial traces of failed runs.
using TraceSink = std::function<void(std::size_t instance, std::size_t attempt, const RunTrace&)>;

TaskPrompt game24_prompt(const Game24Instance& instance,
                         const PromptTemplates& templates = PromptTemplates::builtin());

/// True if the answer as a whole, or its last non-empty line, passes verify24.
bool game24_answer_correct(std::string_view answer, const Game24Instance& instance);

/// Instances run in order, `attempts` times each. A run error is recorded on
/// the instance as a failed attempt and the batch continues.
EvalReport eval_game24(const MethodRunner& runner, const std::vector<Game24Instance>& instances,
                       std::size_t attempts = 1, const TraceSink& sink = {},
                       const PromptTemplates& templates = PromptTemplates::builtin());

/// Scores answers[i] against gold[i]. Throws invalid_input on a length mismatch.
EvalReport eval_similarity(const std::vector<std::string>& answers,
                           const std::vector<std::vector<std::string>>& gold);

struct QaRecord {
  std::string question;
  std::string best_answer;
  std::vector<std::string> correct_answers;

  /// best_answer followed by the correct answers not equal to it.
  std::vector<std::string> references() const;
};

EvalReport eval_qa(const MethodRunner& runner, const std::vector<QaRecord>& records,
                   const TraceSink& sink = {});

struct CodegenTask {
  std::string id;
  std::string prompt;
  // Shell command; reads the candidate on stdin, exits 0 on pass.
  std::string checker;
};

using Checker = std::function<bool(const CodegenTask&, const std::string& candidate)>;

/// Pipes the candidate into the task's checker command.
bool run_checker_command(const CodegenTask& task, const std::string& candidate);

EvalReport eval_codegen(const MethodRunner& runner, const std::vector<CodegenTask>& tasks,
                        std::size_t samples, std::vector<std::size_t> ks,
                        const TraceSink& sink = {}, const Checker& checker = run_checker_command);

/// Datasets. Parse errors are invalid_input naming the source and line.
std::vector<Game24Instance> parse_game24_dataset(std::istream& in, const std::string& source);
std::vector<Game24Instance> load_game24_dataset(const std::string& path);
/// TruthfulQA CSV layout: a header row naming "Question", "Best Answer" and
/// "Correct Answers" (the latter "; "-separated); other columns are ignored.
std::vector<QaRecord> parse_qa_csv(std::istream& in, const std::string& source);
std::vector<QaRecord> load_qa_dataset(const std::string& path);
/// JSON lines of {"task_id", "prompt", "checker"}.
std::vector<CodegenTask> parse_codegen_jsonl(std::istream& in, const std::string& source);
std::vector<CodegenTask> load_codegen_dataset(const std::string& path);

/// `count` distinct indices out of [0, total), chosen by a seeded partial
/// Fisher-Yates shuffle and returned in ascending order. count >= total
/// returns every index.
std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count, std::uint64_t seed);

/// Methods as rows, metrics as columns.
std::string comparison_table(const std::vector<EvalReport>& reports);
std::string comparison_csv(const std::vector<EvalReport>& reports);

}  // namespace ratt
