#include "ratt/eval/harness.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ratt/core/error.hpp"
#include "ratt/eval/metrics.hpp"

namespace ratt {

std::string_view to_string(EvalTask task) {
  switch (task) {
    case EvalTask::game24: return "game24";
    case EvalTask::similarity: return "similarity";
    case EvalTask::codegen: return "codegen";
  }
  return "game24";
}

EvalTask eval_task_from_string(std::string_view name) {
  if (name == "game24") return EvalTask::game24;
  if (name == "similarity") return EvalTask::similarity;
  if (name == "codegen") return EvalTask::codegen;
  throw Error(ErrorKind::invalid_input, "unknown eval task: " + std::string(name));
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::ifstream open_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read dataset " + path);
  return in;
}

Error line_error(const std::string& source, std::size_t line, const std::string& what) {
  return Error(ErrorKind::invalid_input, source + ":" + std::to_string(line) + ": " + what);
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string display(const std::string& name, double v) {
  return name == "success_rate" ? fmt("%.1f%%", v) : fmt("%.4f", v);
}

std::string header(const std::string& name) {
  return name == "success_rate" ? "Success" : name;
}

// Columns in first-seen order across reports.
std::vector<std::string> columns(const std::vector<EvalReport>& reports) {
  std::vector<std::string> out;
  for (const auto& r : reports) {
    for (const auto& [name, _] : r.metrics) {
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
  }
  return out;
}

InstanceOutcome run_attempts(const MethodRunner& runner, const TaskPrompt& prompt,
                             std::size_t index, std::size_t attempts, const TraceSink& sink,
                             const std::function<bool(const std::string&)>& judge) {
  InstanceOutcome o;
  o.index = index;
  o.attempts = attempts;
  for (std::size_t a = 0; a < attempts; ++a) {
    try {
      RunTrace trace = runner(prompt);
      if (sink) sink(index, a, trace);
      o.answers.push_back(trace.final_answer);
      if (judge(trace.final_answer)) ++o.correct;
    } catch (const RunError& e) {
      if (sink && e.trace()) sink(index, a, *e.trace());
      o.answers.emplace_back();
      o.errors.emplace_back(e.what());
    } catch (const Error& e) {
      o.answers.emplace_back();
      o.errors.emplace_back(e.what());
    }
  }
  return o;
}

}  // namespace

void EvalReport::recompute() {
  metrics.clear();
  if (task == EvalTask::similarity) {
    double b = 0.0, r = 0.0;
    for (const auto& o : outcomes) {
      b += o.bleu.value_or(0.0);
      r += o.rouge_l.value_or(0.0);
    }
    const double n = outcomes.empty() ? 1.0 : static_cast<double>(outcomes.size());
    metrics.emplace_back("bleu", b / n);
    metrics.emplace_back("rouge_l", r / n);
    return;
  }
  std::size_t successes = 0;
  for (const auto& o : outcomes) successes += o.success() ? 1 : 0;
  const double n = outcomes.empty() ? 1.0 : static_cast<double>(outcomes.size());
  metrics.emplace_back("success_rate", 100.0 * static_cast<double>(successes) / n);
  for (std::size_t k : ks) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& o : outcomes) {
      if (k < 1 || k > o.attempts) continue;
      sum += pass_at_k(o.attempts, o.correct, k);
      ++counted;
    }
    if (counted > 0) metrics.emplace_back("pass@" + std::to_string(k), sum / static_cast<double>(counted));
  }
}

std::optional<double> EvalReport::metric(std::string_view name) const {
  for (const auto& [n, v] : metrics) {
    if (n == name) return v;
  }
  return std::nullopt;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : outcomes) {
    nlohmann::json j = {{"index", o.index},     {"label", o.label},     {"answers", o.answers},
                        {"attempts", o.attempts}, {"correct", o.correct}, {"success", o.success()},
                        {"errors", o.errors}};
    if (o.bleu) j["bleu"] = *o.bleu;
    if (o.rouge_l) j["rouge_l"] = *o.rouge_l;
    outs.push_back(std::move(j));
  }
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& [n, v] : metrics) ms.push_back({{"name", n}, {"value", v}});
  return {{"method", method}, {"dataset", dataset},       {"task", std::string(to_string(task))},
          {"seed", seed},     {"config", config},         {"ks", ks},
          {"metrics", ms},    {"outcomes", std::move(outs)}};
}

EvalReport EvalReport::from_json(const nlohmann::json& doc) {
  try {
    EvalReport r;
    r.method = doc.at("method").get<std::string>();
    r.dataset = doc.at("dataset").get<std::string>();
    r.task = eval_task_from_string(doc.at("task").get<std::string>());
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.config = doc.at("config");
    r.ks = doc.at("ks").get<std::vector<std::size_t>>();
    for (const auto& j : doc.at("outcomes")) {
      InstanceOutcome o;
      o.index = j.at("index").get<std::size_t>();
      o.label = j.at("label").get<std::string>();
      o.answers = j.at("answers").get<std::vector<std::string>>();
      o.attempts = j.at("attempts").get<std::size_t>();
      o.correct = j.at("correct").get<std::size_t>();
      o.errors = j.at("errors").get<std::vector<std::string>>();
      if (j.contains("bleu")) o.bleu = j["bleu"].get<double>();
      if (j.contains("rouge_l")) o.rouge_l = j["rouge_l"].get<double>();
      r.outcomes.push_back(std::move(o));
    }
    for (const auto& m : doc.at("metrics")) {
      r.metrics.emplace_back(m.at("name").get<std::string>(), m.at("value").get<double>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema, std::string("eval report: ") + e.what());
  }
}

TaskPrompt game24_prompt(const Game24Instance& instance, const PromptTemplates& templates) {
  return {templates.render("game24_task", {{"numbers", instance.str()}}), TaskKind::game24};
}

bool game24_answer_correct(std::string_view answer, const Game24Instance& instance) {
  if (verify24(answer, instance)) return true;
  const std::string text(answer);
  std::istringstream lines(text);
  std::string line, last;
  while (std::getline(lines, line)) {
    if (!trim(line).empty()) last = line;
  }
  return !last.empty() && last != text && verify24(last, instance);
}

EvalReport eval_game24(const MethodRunner& runner, const std::vector<Game24Instance>& instances,
                       std::size_t attempts, const TraceSink& sink,
                       const PromptTemplates& templates) {
  if (instances.empty()) throw Error(ErrorKind::invalid_input, "no game24 instances");
  if (attempts < 1) throw Error(ErrorKind::invalid_input, "attempts must be at least 1");
  EvalReport report;
  report.task = EvalTask::game24;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    auto o = run_attempts(runner, game24_prompt(inst, templates), i, attempts, sink,
                          [&](const std::string& a) { return game24_answer_correct(a, inst); });
    o.label = inst.str();
    report.outcomes.push_back(std::move(o));
  }
  report.recompute();
  return report;
}

EvalReport eval_similarity(const std::vector<std::string>& answers,
                           const std::vector<std::vector<std::string>>& gold) {
  if (answers.size() != gold.size()) {
    throw Error(ErrorKind::invalid_input, "eval_similarity: " + std::to_string(answers.size()) +
                                              " answers for " + std::to_string(gold.size()) + " gold entries");
  }
  EvalReport report;
  report.task = EvalTask::similarity;
  report.ks.clear();
  for (std::size_t i = 0; i < answers.size(); ++i) {
    InstanceOutcome o;
    o.index = i;
    o.attempts = 1;
    o.answers = {answers[i]};
    o.bleu = bleu(answers[i], gold[i]);
    o.rouge_l = rouge_l_max(answers[i], gold[i]);
    report.outcomes.push_back(std::move(o));
  }
  report.recompute();
  return report;
}

std::vector<std::string> QaRecord::references() const {
  std::vector<std::string> out;
  if (!best_answer.empty()) out.push_back(best_answer);
  for (const auto& a : correct_answers) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  return out;
}

EvalReport eval_qa(const MethodRunner& runner, const std::vector<QaRecord>& records,
                   const TraceSink& sink) {
  if (records.empty()) throw Error(ErrorKind::invalid_input, "no qa records");
  std::vector<std::string> answers;
  std::vector<std::vector<std::string>> gold;
  std::vector<InstanceOutcome> runs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto o = run_attempts(runner, {records[i].question, TaskKind::qa}, i, 1, sink,
                          [](const std::string&) { return false; });
    answers.push_back(o.answers.front());
    auto refs = records[i].references();
    if (refs.empty()) refs.emplace_back();
    gold.push_back(std::move(refs));
    runs.push_back(std::move(o));
  }
  EvalReport report = eval_similarity(answers, gold);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    report.outcomes[i].label = records[i].question;
    report.outcomes[i].errors = runs[i].errors;
  }
  return report;
}

bool run_checker_command(const CodegenTask& task, const std::string& candidate) {
  FILE* pipe = ::popen(task.checker.c_str(), "w");
  if (pipe == nullptr) throw Error(ErrorKind::io, "cannot start checker for " + task.id);
  std::fwrite(candidate.data(), 1, candidate.size(), pipe);
  const int status = ::pclose(pipe);
  return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

EvalReport eval_codegen(const MethodRunner& runner, const std::vector<CodegenTask>& tasks,
                        std::size_t samples, std::vector<std::size_t> ks, const TraceSink& sink,
                        const Checker& checker) {
  if (tasks.empty()) throw Error(ErrorKind::invalid_input, "no codegen tasks");
  if (samples < 1) throw Error(ErrorKind::invalid_input, "samples must be at least 1");
  for (std::size_t k : ks) {
    if (k < 1 || k > samples) {
      throw Error(ErrorKind::invalid_input, "pass@" + std::to_string(k) + " needs 1 <= k <= samples");
    }
  }
  EvalReport report;
  report.task = EvalTask::codegen;
  report.ks = std::move(ks);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    auto o = run_attempts(runner, {t.prompt, TaskKind::codegen}, i, samples, sink,
                          [&](const std::string& a) { return checker(t, a); });
    o.label = t.id;
    report.outcomes.push_back(std::move(o));
  }
  report.recompute();
  return report;
}

std::vector<Game24Instance> parse_game24_dataset(std::istream& in, const std::string& source) {
  std::vector<Game24Instance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<int> values;
    std::stringstream fields(t);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const std::string f = trim(field);
      if (f.empty() || !std::all_of(f.begin(), f.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
          f.size() > 2) {
        throw line_error(source, lineno, "expected four comma-separated integers, got \"" + t + "\"");
      }
      values.push_back(std::stoi(f));
    }
    if (values.size() != 4 || t.back() == ',') {
      throw line_error(source, lineno, "expected four comma-separated integers, got \"" + t + "\"");
    }
    try {
      out.push_back(Game24Instance::from({values[0], values[1], values[2], values[3]}));
    } catch (const Error& e) {
      throw line_error(source, lineno, e.what());
    }
  }
  if (out.empty()) throw Error(ErrorKind::invalid_input, source + ": no instances");
  return out;
}

std::vector<Game24Instance> load_game24_dataset(const std::string& path) {
  auto in = open_dataset(path);
  return parse_game24_dataset(in, path);
}

namespace {

// One CSV record; quoted fields may span lines. Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& lineno,
                     const std::string& source) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  const std::size_t start = lineno + 1;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++lineno;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++lineno;
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw line_error(source, start, "unterminated quoted field");
  if (!any) return false;
  ++lineno;
  fields.push_back(std::move(field));
  return true;
}

std::vector<std::string> split_answers(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = s.find(';', pos);
    const std::string part = trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (!part.empty()) out.push_back(part);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::vector<QaRecord> parse_qa_csv(std::istream& in, const std::string& source) {
  std::vector<std::string> fields;
  std::size_t lineno = 0;
  if (!read_csv_record(in, fields, lineno, source)) {
    throw Error(ErrorKind::invalid_input, source + ": empty file");
  }
  int q = -1, best = -1, correct = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string h = lower(trim(fields[i]));
    if (h == "question") q = static_cast<int>(i);
    if (h == "best answer" || h == "best_answer") best = static_cast<int>(i);
    if (h == "correct answers" || h == "correct_answers") correct = static_cast<int>(i);
  }
  if (q < 0 || best < 0 || correct < 0) {
    throw line_error(source, 1, "header must name Question, Best Answer and Correct Answers");
  }
  const auto need = static_cast<std::size_t>(std::max({q, best, correct})) + 1;
  std::vector<QaRecord> out;
  for (;;) {
    const std::size_t start = lineno + 1;
    if (!read_csv_record(in, fields, lineno, source)) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() < need) {
      throw line_error(source, start, "expected at least " + std::to_string(need) + " fields, got " +
                                          std::to_string(fields.size()));
    }
    QaRecord r;
    r.question = trim(fields[static_cast<std::size_t>(q)]);
    r.best_answer = trim(fields[static_cast<std::size_t>(best)]);
    r.correct_answers = split_answers(fields[static_cast<std::size_t>(correct)]);
    if (r.question.empty()) throw line_error(source, start, "empty question");
    out.push_back(std::move(r));
  }
  if (out.empty()) throw Error(ErrorKind::invalid_input, source + ": no records");
  return out;
}

std::vector<QaRecord> load_qa_dataset(const std::string& path) {
  auto in = open_dataset(path);
  return parse_qa_csv(in, path);
}

std::vector<CodegenTask> parse_codegen_jsonl(std::istream& in, const std::string& source) {
  std::vector<CodegenTask> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("task_id").get<std::string>(), j.at("prompt").get<std::string>(),
                     j.at("checker").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw line_error(source, lineno, e.what());
    }
  }
  if (out.empty()) throw Error(ErrorKind::invalid_input, source + ": no tasks");
  return out;
}

std::vector<CodegenTask> load_codegen_dataset(const std::string& path) {
  auto in = open_dataset(path);
  return parse_codegen_jsonl(in, path);
}

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  if (count >= total) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string comparison_table(const std::vector<EvalReport>& reports) {
  const auto cols = columns(reports);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Method"};
  for (const auto& c : cols) head.push_back(header(c));
  rows.push_back(head);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.method};
    for (const auto& c : cols) {
      const auto v = r.metric(c);
      row.push_back(v ? display(c, *v) : "-");
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      const auto& cell = rows[r][i];
      if (i == 0) {
        out += cell + std::string(width[i] - cell.size(), ' ');
      } else {
        out += "  " + std::string(width[i] - cell.size(), ' ') + cell;
      }
    }
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
      out += std::string(total, '-') + '\n';
    }
  }
  return out;
}

std::string comparison_csv(const std::vector<EvalReport>& reports) {
  const auto cols = columns(reports);
  std::string out = "method";
  for (const auto& c : cols) out += "," + c;
  out += '\n';
  for (const auto& r : reports) {
    out += r.method;
    for (const auto& c : cols) {
      const auto v = r.metric(c);
      out += ",";
      if (v) out += c == "success_rate" ? fmt("%.1f", *v) : fmt("%.6f", *v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace ratt
