#include "ratt/app/trace_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ratt/provider/scripted_provider.hpp"

namespace ratt {

using nlohmann::json;

namespace {

json vector_json(const EmbeddingVector& v) {
  return std::vector<float>(v.data(), v.data() + v.size());
}

EmbeddingVector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<float>>();
  EmbeddingVector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<T>();
}

json temperatures_json(const Temperatures& t) {
  return {{"strategy_gen", t.strategy_gen}, {"lookahead", t.lookahead},   {"correction", t.correction},
          {"integration", t.integration},   {"final", t.final},           {"baseline", t.baseline},
          {"sampling", t.sampling}};
}

Temperatures temperatures_from_json(const json& j) {
  Temperatures t;
  t.strategy_gen = j.value("strategy_gen", t.strategy_gen);
  t.lookahead = j.value("lookahead", t.lookahead);
  t.correction = j.value("correction", t.correction);
  t.integration = j.value("integration", t.integration);
  t.final = j.value("final", t.final);
  t.baseline = j.value("baseline", t.baseline);
  t.sampling = j.value("sampling", t.sampling);
  return t;
}

json band_policy_json(const BandPolicy& p) {
  return {{"l1", p.l1}, {"l2", p.l2}, {"instructions", p.instructions}};
}

BandPolicy band_policy_from_json(const json& j) {
  BandPolicy p;
  p.l1 = j.at("l1").get<std::size_t>();
  p.l2 = j.at("l2").get<std::size_t>();
  if (j.contains("instructions")) p.instructions = j.at("instructions").get<std::array<std::string, 3>>();
  return p;
}

json node_json(const ThoughtNode& n) {
  return {{"id", n.id},
          {"layer", n.layer},
          {"strategy_index", n.strategy_index},
          {"role", std::string(to_string(n.role))},
          {"raw_text", n.raw_text},
          {"refined_text", optional_json(n.refined_text)},
          {"retrieval_ref", optional_json(n.retrieval_ref)},
          {"lookahead_score", optional_json(n.lookahead_score)},
          {"flags", n.flags}};
}

ThoughtNode node_from_json(const json& j) {
  ThoughtNode n;
  n.id = j.at("id").get<NodeId>();
  n.layer = j.at("layer").get<std::size_t>();
  n.strategy_index = j.at("strategy_index").get<std::size_t>();
  n.role = node_role_from_string(j.at("role").get<std::string>());
  n.raw_text = j.at("raw_text").get<std::string>();
  n.refined_text = optional_from<std::string>(j, "refined_text");
  n.retrieval_ref = optional_from<std::size_t>(j, "retrieval_ref");
  n.lookahead_score = optional_from<double>(j, "lookahead_score");
  n.flags = j.at("flags").get<std::vector<std::string>>();
  return n;
}

json entry_json(const RetrievalEntry& e) {
  return {{"doc_id", e.doc_id}, {"chunk_index", e.chunk_index}, {"text", e.text}, {"score", e.score}};
}

RetrievalEntry entry_from_json(const json& j) {
  RetrievalEntry e;
  e.doc_id = j.at("doc_id").get<std::string>();
  e.chunk_index = j.at("chunk_index").get<std::uint32_t>();
  e.text = j.at("text").get<std::string>();
  e.score = j.at("score").get<double>();
  return e;
}

json retrieval_json(const RetrievalRecord& r) {
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back(entry_json(e));
  return {{"node", r.node},
          {"layer", r.layer},
          {"band", r.band ? json(std::string(to_string(*r.band))) : json(nullptr)},
          {"instruction", r.instruction},
          {"mode", std::string(to_string(r.mode))},
          {"query_text", r.query_text},
          {"k_requested", r.k_requested},
          {"entries", std::move(entries)},
          {"skip_reason", optional_json(r.skip_reason)}};
}

RetrievalRecord retrieval_from_json(const json& j) {
  RetrievalRecord r;
  r.node = j.at("node").get<NodeId>();
  r.layer = j.at("layer").get<std::size_t>();
  if (const auto b = optional_from<std::string>(j, "band")) r.band = band_from_string(*b);
  r.instruction = j.at("instruction").get<std::string>();
  r.mode = query_mode_from_string(j.at("mode").get<std::string>());
  r.query_text = j.at("query_text").get<std::string>();
  r.k_requested = j.at("k_requested").get<std::size_t>();
  for (const auto& e : j.at("entries")) r.entries.push_back(entry_from_json(e));
  r.skip_reason = optional_from<std::string>(j, "skip_reason");
  return r;
}

json call_json(const CallRecord& c) {
  json j = {{"index", c.index},
            {"kind", c.kind == CallKind::generate ? "generate" : "embed"},
            {"model", c.model}};
  if (c.kind == CallKind::generate) {
    j["call_tag"] = std::string(to_string(c.tag));
    j["system_instruction"] = c.system_instruction;
    j["user_prompt"] = c.user_prompt;
    j["temperature"] = c.temperature;
    j["max_tokens"] = c.max_tokens;
    j["response"] = c.response;
  } else {
    j["inputs"] = c.inputs;
    json vs = json::array();
    for (const auto& v : c.vectors) vs.push_back(vector_json(v));
    j["vectors"] = std::move(vs);
  }
  j["error_kind"] = c.error_kind ? json(std::string(to_string(*c.error_kind))) : json(nullptr);
  j["error"] = optional_json(c.error);
  j["attempts"] = c.attempts;
  j["prompt_tokens"] = c.prompt_tokens;
  j["completion_tokens"] = c.completion_tokens;
  j["prompt_digest"] = c.prompt_digest;
  j["response_digest"] = c.response_digest;
  return j;
}

CallRecord call_from_json(const json& j) {
  CallRecord c;
  c.index = j.at("index").get<std::size_t>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "generate") {
    c.kind = CallKind::generate;
  } else if (kind == "embed") {
    c.kind = CallKind::embed;
  } else {
    throw Error(ErrorKind::schema, "unknown call kind '" + kind + "'");
  }
  c.model = j.at("model").get<std::string>();
  if (c.kind == CallKind::generate) {
    c.tag = call_tag_from_string(j.at("call_tag").get<std::string>());
    c.system_instruction = j.at("system_instruction").get<std::string>();
    c.user_prompt = j.at("user_prompt").get<std::string>();
    c.temperature = j.at("temperature").get<double>();
    c.max_tokens = j.at("max_tokens").get<int>();
    c.response = j.at("response").get<std::string>();
  } else {
    c.inputs = j.at("inputs").get<std::vector<std::string>>();
    for (const auto& v : j.at("vectors")) c.vectors.push_back(vector_from_json(v));
  }
  if (const auto k = optional_from<std::string>(j, "error_kind")) c.error_kind = error_kind_from_string(*k);
  c.error = optional_from<std::string>(j, "error");
  c.attempts = j.at("attempts").get<int>();
  c.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
  c.completion_tokens = j.at("completion_tokens").get<std::size_t>();
  c.prompt_digest = j.at("prompt_digest").get<std::string>();
  c.response_digest = j.at("response_digest").get<std::string>();
  return c;
}

json snapshot_json(const LibrarySnapshot& s) {
  json chunks = json::array();
  for (const auto& c : s.chunks) {
    chunks.push_back({{"doc_id", c.doc_id},
                      {"chunk_index", c.chunk_index},
                      {"text", c.text},
                      {"vector", vector_json(c.vector)}});
  }
  return {{"embedder_id", s.embedder_id},
          {"dimension", s.dimension},
          {"total_chunks", s.total_chunks},
          {"chunks", std::move(chunks)}};
}

LibrarySnapshot snapshot_from_json(const json& j) {
  LibrarySnapshot s;
  s.embedder_id = j.at("embedder_id").get<std::string>();
  s.dimension = j.at("dimension").get<std::size_t>();
  s.total_chunks = j.at("total_chunks").get<std::size_t>();
  for (const auto& c : j.at("chunks")) {
    s.chunks.push_back({c.at("doc_id").get<std::string>(), c.at("chunk_index").get<std::uint32_t>(),
                        c.at("text").get<std::string>(), vector_from_json(c.at("vector"))});
  }
  return s;
}

}  // namespace

json to_json(const RunConfig& c) {
  return {{"m", c.m},
          {"T", c.T},
          {"k", c.k},
          {"band_policy", c.band_policy ? band_policy_json(*c.band_policy) : json(nullptr)},
          {"lookahead_enabled", c.lookahead_enabled},
          {"query_mode", std::string(to_string(c.query_mode))},
          {"temperatures", temperatures_json(c.temperatures)},
          {"max_tokens", c.max_tokens}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.m = j.value("m", c.m);
  c.T = j.value("T", c.T);
  c.k = j.value("k", c.k);
  if (j.contains("band_policy") && !j.at("band_policy").is_null()) {
    c.band_policy = band_policy_from_json(j.at("band_policy"));
  }
  c.lookahead_enabled = j.value("lookahead_enabled", c.lookahead_enabled);
  if (j.contains("query_mode")) c.query_mode = query_mode_from_string(j.at("query_mode").get<std::string>());
  if (j.contains("temperatures")) c.temperatures = temperatures_from_json(j.at("temperatures"));
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  return c;
}

json to_json(const BaselineConfig& c) {
  return {{"n_sc", c.n_sc}, {"tot_b", c.tot_b}, {"tot_d", c.tot_d},
          {"rat_steps", c.rat_steps}, {"rat_k", c.rat_k}};
}

BaselineConfig baseline_config_from_json(const json& j) {
  BaselineConfig c;
  c.n_sc = j.value("n_sc", c.n_sc);
  c.tot_b = j.value("tot_b", c.tot_b);
  c.tot_d = j.value("tot_d", c.tot_d);
  c.rat_steps = j.value("rat_steps", c.rat_steps);
  c.rat_k = j.value("rat_k", c.rat_k);
  return c;
}

json to_json(const MethodConfig& c) {
  return {{"method", std::string(to_string(c.method))},
          {"engine", to_json(c.engine)},
          {"baseline", to_json(c.baseline)}};
}

MethodConfig method_config_from_json(const json& j) {
  MethodConfig c;
  c.method = method_from_string(j.at("method").get<std::string>());
  c.engine = run_config_from_json(j.at("engine"));
  c.baseline = baseline_config_from_json(j.at("baseline"));
  return c;
}

json trace_to_json(const RunTrace& t, const json& app_config) {
  json nodes = json::array();
  for (const auto& n : t.tree.nodes()) nodes.push_back(node_json(n));
  json edges = json::array();
  for (const auto& e : t.tree.edges()) edges.push_back({{"parent", e.parent}, {"child", e.child}});
  json retrievals = json::array();
  for (const auto& r : t.retrievals) retrievals.push_back(retrieval_json(r));
  json calls = json::array();
  for (const auto& c : t.calls) calls.push_back(call_json(c));
  return {{"schema_version", kTraceSchemaVersion},
          {"seed", t.seed},
          {"method_config", to_json(t.config)},
          {"app_config", app_config},
          {"templates", t.templates.to_json()},
          {"prompt", {{"text", t.prompt.text}, {"task_kind", std::string(to_string(t.prompt.task_kind))}}},
          {"library", t.library ? snapshot_json(*t.library) : json(nullptr)},
          {"tree", {{"root_id", t.tree.root_id()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}}},
          {"retrievals", std::move(retrievals)},
          {"calls", std::move(calls)},
          {"final_answer", t.final_answer},
          {"totals",
           {{"generate_calls", t.totals.generate_calls},
            {"embed_calls", t.totals.embed_calls},
            {"prompt_tokens", t.totals.prompt_tokens},
            {"completion_tokens", t.totals.completion_tokens}}},
          {"error", optional_json(t.error)}};
}

TraceFile trace_from_json(const json& doc) {
  try {
    TraceFile f;
    f.schema_version = doc.at("schema_version").get<int>();
    if (f.schema_version != kTraceSchemaVersion) {
      throw Error(ErrorKind::schema, "unsupported trace schema version " + std::to_string(f.schema_version));
    }
    const auto& tree = doc.at("tree");
    std::vector<ThoughtNode> nodes;
    for (const auto& n : tree.at("nodes")) nodes.push_back(node_from_json(n));
    std::vector<Edge> edges;
    for (const auto& e : tree.at("edges")) edges.push_back({e.at("parent").get<NodeId>(), e.at("child").get<NodeId>()});
    RunTrace t(ThoughtTree::restore(tree.at("root_id").get<NodeId>(), std::move(nodes), std::move(edges)));
    t.seed = doc.at("seed").get<std::uint64_t>();
    t.config = method_config_from_json(doc.at("method_config"));
    t.templates = PromptTemplates::from_json(doc.at("templates"));
    t.prompt.text = doc.at("prompt").at("text").get<std::string>();
    t.prompt.task_kind = task_kind_from_string(doc.at("prompt").at("task_kind").get<std::string>());
    if (!doc.at("library").is_null()) t.library = snapshot_from_json(doc.at("library"));
    for (const auto& r : doc.at("retrievals")) t.retrievals.push_back(retrieval_from_json(r));
    for (const auto& c : doc.at("calls")) t.calls.push_back(call_from_json(c));
    t.final_answer = doc.at("final_answer").get<std::string>();
    const auto& totals = doc.at("totals");
    t.totals.generate_calls = totals.at("generate_calls").get<std::size_t>();
    t.totals.embed_calls = totals.at("embed_calls").get<std::size_t>();
    t.totals.prompt_tokens = totals.at("prompt_tokens").get<std::size_t>();
    t.totals.completion_tokens = totals.at("completion_tokens").get<std::size_t>();
    t.error = optional_from<std::string>(doc, "error");
    f.app_config = doc.at("app_config");
    f.trace = std::move(t);
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, std::string("trace: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::schema) throw;
    throw Error(ErrorKind::schema, std::string("trace: ") + e.what());
  }
}

json timing_json(const RunTrace& t) {
  json latencies = json::array();
  for (const auto& c : t.calls) latencies.push_back(c.latency_ms);
  return {{"wall_ms", t.wall_ms}, {"call_latency_ms", std::move(latencies)}};
}

std::string timing_path(const std::string& trace_path) { return trace_path + ".timing.json"; }

void save_trace(const std::string& path, const RunTrace& trace, const json& app_config) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write trace " + path);
    out << trace_to_json(trace, app_config).dump(2) << '\n';
    if (!out) throw Error(ErrorKind::io, "failed writing trace " + path);
  }
  std::ofstream timing(timing_path(path), std::ios::binary | std::ios::trunc);
  if (timing) timing << timing_json(trace).dump(2) << '\n';
}

TraceFile load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read trace " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, "trace " + path + " is not valid JSON: " + e.what());
  }
  return trace_from_json(doc);
}

}  // namespace ratt
