#include "ratt/app/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ratt/app/config.hpp"
#include "ratt/app/replay.hpp"
#include "ratt/app/trace_io.hpp"
#include "ratt/baselines/baselines.hpp"
#include "ratt/eval/harness.hpp"
#include "ratt/provider/http_provider.hpp"
#include "ratt/provider/scripted_provider.hpp"
#include "ratt/retrieval/index_io.hpp"

namespace ratt {

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::size_t> m, T, k, l1, l2;
  std::optional<bool> lookahead;
  std::optional<std::string> query_mode;
  std::optional<int> max_tokens;
  std::optional<std::size_t> n_sc, tot_b, tot_d, rat_steps, rat_k;
  std::optional<std::string> base_url, generation_model, embedding_model;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> library;
};

void add_config_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--seed", o.seed, "Seed recorded in every artifact");
  cmd->add_option("--base-url", o.base_url, "Provider endpoint");
  cmd->add_option("--generation-model", o.generation_model);
  cmd->add_option("--embedding-model", o.embedding_model);
}

void add_engine_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--m", o.m, "Strategy nodes per layer");
  cmd->add_option("--T", o.T, "Iterations");
  cmd->add_option("--k", o.k, "Chunks retrieved per node");
  cmd->add_option("--l1", o.l1, "Last broad layer");
  cmd->add_option("--l2", o.l2, "Last targeted layer");
  cmd->add_option("--lookahead", o.lookahead, "Score nodes by lookahead (0 or 1)");
  cmd->add_option("--query-mode", o.query_mode, "embed_concat_text or average_vectors");
  cmd->add_option("--max-tokens", o.max_tokens);
  cmd->add_option("--n-sc", o.n_sc, "CoT-SC samples");
  cmd->add_option("--tot-b", o.tot_b, "ToT beam width");
  cmd->add_option("--tot-d", o.tot_d, "ToT depth");
  cmd->add_option("--rat-steps", o.rat_steps, "RAT draft steps");
  cmd->add_option("--rat-k", o.rat_k, "RAT chunks per step");
  cmd->add_option("--library", o.library, "Index file");
}

AppConfig resolve_config(const Overrides& o, const std::function<const char*(const char*)>& getenv) {
  AppConfig cfg;
  if (!o.config_path.empty()) cfg.merge_file(o.config_path);
  cfg.merge_env(getenv);
  if (o.base_url) cfg.provider.base_url = *o.base_url;
  if (o.generation_model) cfg.provider.generation_model = *o.generation_model;
  if (o.embedding_model) cfg.provider.embedding_model = *o.embedding_model;
  if (o.seed) cfg.seed = *o.seed;
  if (o.library) cfg.paths.library = *o.library;
  auto& e = cfg.engine;
  if (o.m) e.m = *o.m;
  if (o.T) e.T = *o.T;
  if (o.k) e.k = *o.k;
  if (o.l1 || o.l2) {
    BandPolicy p = e.effective_band_policy();
    if (o.l1) p.l1 = *o.l1;
    if (o.l2) p.l2 = *o.l2;
    e.band_policy = p;
  }
  if (o.lookahead) e.lookahead_enabled = *o.lookahead;
  if (o.query_mode) e.query_mode = query_mode_from_string(*o.query_mode);
  if (o.max_tokens) e.max_tokens = *o.max_tokens;
  auto& b = cfg.baseline;
  if (o.n_sc) b.n_sc = *o.n_sc;
  if (o.tot_b) b.tot_b = *o.tot_b;
  if (o.tot_d) b.tot_d = *o.tot_d;
  if (o.rat_steps) b.rat_steps = *o.rat_steps;
  if (o.rat_k) b.rat_k = *o.rat_k;
  return cfg;
}

std::unique_ptr<Provider> make_provider(const std::string& script_path, const AppConfig& cfg) {
  if (!script_path.empty()) return std::make_unique<ScriptedProvider>(load_script(script_path));
  return std::make_unique<HttpProvider>(cfg.provider);
}

bool retrieves(Method method, const RunConfig& engine) {
  return method == Method::rat || (method == Method::ratt && engine.k > 0);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << content;
}

// Usage problems found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Method parse_method(const std::string& name) {
  try {
    return method_from_string(name);
  } catch (const Error&) {
    throw UsageError("unknown method '" + name + "' (expected io, cot, cot_sc, tot, rat or ratt)");
  }
}

MethodConfig method_config(Method method, const AppConfig& cfg) {
  MethodConfig mc{method, cfg.engine, cfg.baseline};
  try {
    mc.engine.validate();
    mc.baseline.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return mc;
}

std::optional<Library> load_library_for(Method method, const AppConfig& cfg) {
  if (cfg.paths.library.empty()) {
    if (retrieves(method, cfg.engine)) {
      throw UsageError(std::string(to_string(method)) + " retrieves and needs --library");
    }
    return std::nullopt;
  }
  return load_index(cfg.paths.library);
}

PromptTemplates load_templates(const std::string& path) {
  return path.empty() ? PromptTemplates::builtin() : PromptTemplates::load(path);
}

// ---- ingest -------------------------------------------------------------

struct IngestArgs {
  std::string input, output, script;
  std::size_t chunk_size = ChunkOptions{}.chunk_size;
  std::size_t overlap = ChunkOptions{}.overlap;
  std::size_t batch_size = IndexBuildOptions{}.batch_size;
};

int cmd_ingest(const IngestArgs& a, const AppConfig& cfg, std::ostream& out) {
  if (a.overlap >= a.chunk_size) throw UsageError("--overlap must be smaller than --chunk-size");
  auto docs = load_documents(a.input);
  auto provider = make_provider(a.script, cfg);
  IndexBuildOptions opts;
  opts.chunking = {a.chunk_size, a.overlap};
  opts.batch_size = a.batch_size;
  const Library lib = build_index(std::move(docs), opts, *provider);
  try {
    save_index(lib, a.output);
  } catch (...) {
    std::error_code ec;
    fs::remove(a.output + ".partial", ec);
    throw;
  }
  out << "chunks: " << lib.size() << "\n"
      << "dimension: " << lib.dimension() << "\n";
  return kExitOk;
}

// ---- run ----------------------------------------------------------------

struct RunArgs {
  std::string method, prompt, prompt_file, task_kind = "freeform", script, trace, templates;
};

int cmd_run(const RunArgs& a, const AppConfig& cfg, std::ostream& out, std::ostream& err) {
  const Method method = parse_method(a.method);
  if (a.prompt.empty() == a.prompt_file.empty()) throw UsageError("give exactly one of --prompt or --prompt-file");
  TaskPrompt prompt;
  try {
    prompt.task_kind = task_kind_from_string(a.task_kind);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  prompt.text = a.prompt.empty() ? read_file(a.prompt_file) : a.prompt;
  const MethodConfig mc = method_config(method, cfg);
  const auto library = load_library_for(method, cfg);
  const PromptTemplates templates = load_templates(a.templates);
  auto provider = make_provider(a.script, cfg);
  const std::string trace_path =
      a.trace.empty() ? (fs::path(cfg.paths.trace_dir) / (a.method + ".json")).string() : a.trace;
  const auto app_json = cfg.to_json();

  try {
    RunTrace trace = run_method(mc, prompt, library ? &*library : nullptr, *provider, templates);
    trace.seed = cfg.seed;
    save_trace(trace_path, trace, app_json);
    out << trace.final_answer << "\n";
    return kExitOk;
  } catch (const RunError& e) {
    if (e.trace()) {
      RunTrace partial = *e.trace();
      partial.seed = cfg.seed;
      save_trace(trace_path, partial, app_json);
      err << "run failed: " << e.what() << "\npartial trace written to " << trace_path << "\n";
    } else {
      err << "run failed: " << e.what() << "\n";
    }
    return kExitFailure;
  }
}

// ---- replay -------------------------------------------------------------

int cmd_replay(const std::string& path, std::ostream& out) {
  const TraceFile file = load_trace(path);
  const ReplayResult r = replay_trace(file);
  out << r.report() << "\n";
  return r.match ? kExitOk : kExitFailure;
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
  std::string task, dataset, out_dir = "eval-out", templates;
  std::vector<std::string> methods;
  std::vector<std::string> scripts;
  std::size_t attempts = 1;
  std::vector<std::size_t> ks;
  std::optional<std::size_t> sample;
};

std::string script_for(const std::vector<std::string>& scripts, const std::string& method) {
  std::string fallback;
  for (const auto& s : scripts) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      fallback = s;
    } else if (s.substr(0, eq) == method) {
      return s.substr(eq + 1);
    }
  }
  return fallback;
}

template <class T>
std::vector<T> pick(const std::vector<T>& all, const std::optional<std::size_t>& sample, std::uint64_t seed) {
  if (!sample) return all;
  std::vector<T> out;
  for (auto i : sample_indices(all.size(), *sample, seed)) out.push_back(all[i]);
  return out;
}

int cmd_eval(const EvalArgs& a, const AppConfig& cfg, std::ostream& out, std::ostream& err) {
  EvalTask task;
  try {
    task = eval_task_from_string(a.task);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (a.methods.empty()) throw UsageError("--methods is empty");
  std::vector<Method> methods;
  for (const auto& m : a.methods) methods.push_back(parse_method(m));
  if (a.attempts < 1) throw UsageError("--attempts must be at least 1");
  std::vector<std::size_t> ks = a.ks.empty() ? std::vector<std::size_t>{1} : a.ks;
  for (auto k : ks) {
    if (k < 1 || k > a.attempts) throw UsageError("--k values must lie in [1, attempts]");
  }

  std::vector<Game24Instance> games;
  std::vector<QaRecord> qa;
  std::vector<CodegenTask> code;
  switch (task) {
    case EvalTask::game24: games = pick(load_game24_dataset(a.dataset), a.sample, cfg.seed); break;
    case EvalTask::similarity: qa = pick(load_qa_dataset(a.dataset), a.sample, cfg.seed); break;
    case EvalTask::codegen: code = pick(load_codegen_dataset(a.dataset), a.sample, cfg.seed); break;
  }
  const PromptTemplates templates = load_templates(a.templates);
  const auto app_json = cfg.to_json();
  const fs::path out_dir(a.out_dir);

  std::vector<EvalReport> reports;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const Method method = methods[mi];
    const std::string name(to_string(method));
    const MethodConfig mc = method_config(method, cfg);
    const auto library = load_library_for(method, cfg);
    auto provider = make_provider(script_for(a.scripts, name), cfg);
    const MethodRunner runner = [&](const TaskPrompt& p) {
      RunTrace t = run_method(mc, p, library ? &*library : nullptr, *provider, templates);
      t.seed = cfg.seed;
      return t;
    };
    const fs::path trace_dir = out_dir / "traces" / name;
    const TraceSink sink = [&](std::size_t i, std::size_t attempt, const RunTrace& t) {
      RunTrace copy = t;
      copy.seed = cfg.seed;
      save_trace((trace_dir / (std::to_string(i) + "-" + std::to_string(attempt) + ".json")).string(), copy,
                 app_json);
    };

    EvalReport report;
    switch (task) {
      case EvalTask::game24: {
        report = eval_game24(runner, games, a.attempts, sink, templates);
        report.ks = ks;
        report.recompute();
        break;
      }
      case EvalTask::similarity: report = eval_qa(runner, qa, sink); break;
      case EvalTask::codegen: report = eval_codegen(runner, code, a.attempts, ks, sink); break;
    }
    report.method = name;
    report.dataset = a.dataset;
    report.seed = cfg.seed;
    report.config = {{"app", app_json},
                     {"method", to_json(mc)},
                     {"attempts", a.attempts},
                     {"sample", a.sample ? nlohmann::json(*a.sample) : nlohmann::json(nullptr)},
                     {"templates_version", templates.version}};
    write_file(out_dir / (name + ".report.json"), report.to_json().dump(2) + "\n");
    for (const auto& o : report.outcomes) {
      for (const auto& e : o.errors) err << name << " instance " << o.index << ": " << e << "\n";
    }
    reports.push_back(std::move(report));
  }
  const std::string table = comparison_table(reports);
  write_file(out_dir / "comparison.txt", table);
  write_file(out_dir / "comparison.csv", comparison_csv(reports));
  out << table;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::function<const char*(const char*)>& getenv_fn) {
  const auto getenv = getenv_fn ? getenv_fn : [](const char* name) -> const char* { return std::getenv(name); };

  CLI::App app{"Retrieval augmented thought tree runner", "ratt"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Overrides o;
  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Chunk and embed documents into an index file");
  c_ingest->add_option("--input", ingest.input, "Directory of text files or JSONL file")->required();
  c_ingest->add_option("--output", ingest.output, "Index file to write")->required();
  c_ingest->add_option("--chunk-size", ingest.chunk_size, "Characters per chunk");
  c_ingest->add_option("--overlap", ingest.overlap, "Characters shared by neighbouring chunks");
  c_ingest->add_option("--batch-size", ingest.batch_size, "Texts per embedding request");
  c_ingest->add_option("--script", ingest.script, "Scripted provider file");
  add_config_options(c_ingest, o);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run one method on one prompt");
  c_run->add_option("--method", run.method, "io, cot, cot_sc, tot, rat or ratt")->required();
  c_run->add_option("--prompt", run.prompt, "Prompt text");
  c_run->add_option("--prompt-file", run.prompt_file, "File holding the prompt");
  c_run->add_option("--task-kind", run.task_kind, "freeform, game24, codegen or qa");
  c_run->add_option("--script", run.script, "Scripted provider file");
  c_run->add_option("--trace", run.trace, "Trace file to write");
  c_run->add_option("--templates", run.templates, "Prompt template file");
  add_config_options(c_run, o);
  add_engine_options(c_run, o);

  std::string replay_path;
  auto* c_replay = app.add_subcommand("replay", "Re-run a trace against its own call log");
  c_replay->add_option("trace", replay_path, "Trace file")->required();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score methods over a dataset");
  c_eval->add_option("--task", eval.task, "game24, similarity or codegen")->required();
  c_eval->add_option("--dataset", eval.dataset, "Dataset file")->required();
  c_eval->add_option("--methods", eval.methods, "Comma-separated methods")->delimiter(',')->required();
  c_eval->add_option("--attempts", eval.attempts, "Runs per instance");
  c_eval->add_option("--pass-k", eval.ks, "pass@k sizes")->delimiter(',');
  c_eval->add_option("--sample", eval.sample, "Evaluate a seeded random subset of this size");
  c_eval->add_option("--out-dir", eval.out_dir, "Directory for reports and traces");
  c_eval->add_option("--script", eval.scripts, "Scripted provider file, or method=file");
  c_eval->add_option("--templates", eval.templates, "Prompt template file");
  add_config_options(c_eval, o);
  add_engine_options(c_eval, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    AppConfig cfg;
    try {
      cfg = resolve_config(o, getenv);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (*c_ingest) return cmd_ingest(ingest, cfg, out);
    if (*c_run) return cmd_run(run, cfg, out, err);
    if (*c_replay) return cmd_replay(replay_path, out);
    if (*c_eval) return cmd_eval(eval, cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_config && (*c_run || *c_eval)) {
      err << "usage: " << e.what() << "\n";
      return kExitUsage;
    }
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ratt
