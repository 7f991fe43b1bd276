#include <doctest.h>

#include <nlohmann/json.hpp>

#include "ratt/engine/ratt_engine.hpp"
#include "support/fixtures.hpp"

using namespace ratt;
using namespace ratt::testing;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

TaskPrompt prompt() { return {"Use 4 4 6 8 to make 24.", TaskKind::game24}; }

RunConfig config(std::size_t m, std::size_t T, std::size_t k, bool lookahead = false) {
  RunConfig c;
  c.m = m;
  c.T = T;
  c.k = k;
  c.lookahead_enabled = lookahead;
  return c;
}

std::size_t count_role(const ThoughtTree& tree, NodeRole role) {
  std::size_t n = 0;
  for (const auto& node : tree.nodes()) n += node.role == role ? 1 : 0;
  return n;
}

std::size_t count_kind(const std::vector<CallRecord>& calls, CallKind kind) {
  std::size_t n = 0;
  for (const auto& c : calls) n += c.kind == kind ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("one layer, two strategies, no retrieval") {
  ScriptedProvider p(ratt_script(2, 1, false, false, 4, "4 * 6 * (8 - 4) / 4 = 24"));
  const auto trace = run_ratt(prompt(), config(2, 1, 0), nullptr, p);
  CHECK(trace.totals.generate_calls == 4);
  CHECK(trace.totals.embed_calls == 0);
  CHECK(trace.tree.size() == 5);
  CHECK(count_role(trace.tree, NodeRole::strategy) == 2);
  CHECK(count_role(trace.tree, NodeRole::integrated) == 1);
  CHECK(count_role(trace.tree, NodeRole::final) == 1);
  CHECK(trace.final_answer == "4 * 6 * (8 - 4) / 4 = 24");
  CHECK(trace.method() == Method::ratt);
  REQUIRE(trace.retrievals.size() == 2);
  for (const auto& r : trace.retrievals) CHECK(r.skip_reason == "k=0");
  CHECK_FALSE(trace.error);
}

TEST_CASE("three strategies, two layers, retrieval with k = 2") {
  const auto lib = pattern_library(9, 4);
  ScriptedProvider p(ratt_script(3, 2, true, false, 4));
  const auto trace = run_ratt(prompt(), config(3, 2, 2), &lib, p);
  CHECK(trace.totals.generate_calls == 15);
  CHECK(trace.totals.embed_calls == 6);
  CHECK(trace.tree.size() == 1 + 2 * 4 + 1);
  REQUIRE(trace.retrievals.size() == 6);
  for (const auto& r : trace.retrievals) {
    CHECK_FALSE(r.skip_reason);
    CHECK(r.entries.size() == 2);
    CHECK(r.k_requested == 2);
  }
  CHECK(p.remaining_generations() == 0);
  CHECK(p.remaining_embeddings() == 0);
}

TEST_CASE("m = 0 and T = 0 are configuration errors") {
  ScriptedProvider p(ProviderScript{});
  CHECK(kind_of([&] { run_ratt(prompt(), config(0, 1, 0), nullptr, p); }) == ErrorKind::invalid_config);
  CHECK(kind_of([&] { run_ratt(prompt(), config(1, 0, 0), nullptr, p); }) == ErrorKind::invalid_config);
  CHECK(p.call_count() == 0);
  auto bad_band = config(1, 3, 0);
  bad_band.band_policy = BandPolicy{2, 2, BandPolicy::default_instructions()};
  CHECK(kind_of([&] { run_ratt(prompt(), bad_band, nullptr, p); }) == ErrorKind::invalid_config);
  CHECK(kind_of([&] { run_ratt({"", TaskKind::freeform}, config(1, 1, 0), nullptr, p); }) ==
        ErrorKind::invalid_input);
}

TEST_CASE("parse_lookahead") {
  CHECK(parse_lookahead("8").score == doctest::Approx(0.8));
  CHECK_FALSE(parse_lookahead("8").parse_warning);
  CHECK(parse_lookahead("Score: 10").score == doctest::Approx(1.0));
  CHECK(parse_lookahead("0").score == 0.0);
  CHECK(parse_lookahead("I rate it 3 out of 10").score == doctest::Approx(0.3));
  const auto banana = parse_lookahead("banana");
  CHECK(banana.score == 0.5);
  CHECK(banana.parse_warning);
  CHECK(parse_lookahead("11").parse_warning);
  CHECK(parse_lookahead("250").parse_warning);
  CHECK(parse_lookahead("").parse_warning);
}

TEST_CASE("lookahead scores and warnings land on the nodes") {
  ProviderScript s;
  s.respond(CallTag::strategy_gen, "a").respond(CallTag::lookahead, "8");
  s.respond(CallTag::strategy_gen, "b").respond(CallTag::lookahead, "banana");
  s.respond(CallTag::integration, "merged").respond(CallTag::final, "done");
  ScriptedProvider p(s);
  const auto trace = run_ratt(prompt(), config(2, 1, 0, true), nullptr, p);
  const auto layer = layer_nodes(trace.tree, 1);
  REQUIRE(layer.size() == 3);
  CHECK(layer[0].lookahead_score == doctest::Approx(0.8));
  CHECK_FALSE(layer[0].has_flag("lookahead_parse_warning"));
  CHECK(layer[1].lookahead_score == 0.5);
  CHECK(layer[1].has_flag("lookahead_parse_warning"));
  const auto calls = p.call_log();
  CHECK(calls[4].user_prompt.find("lookahead score 0.80") != std::string::npos);
  CHECK(calls[4].user_prompt.find("lookahead score 0.50") != std::string::npos);
}

TEST_CASE("form_query modes") {
  const RunConfig cfg = config(1, 1, 1);
  ThoughtNode node;
  node.raw_text = "try 6 * 4";

  SUBCASE("concatenated text embeds once") {
    ScriptedProvider p(ProviderScript().embedding(vec({1, 2, 2})));
    const EngineContext ctx{p, PromptTemplates::builtin(), cfg};
    const auto q = form_query(prompt(), node, "Look broadly.", QueryMode::embed_concat_text, ctx);
    CHECK(q.vector == vec({1, 2, 2}));
    CHECK(q.text.find("Look broadly.") != std::string::npos);
    CHECK(q.text.find(prompt().text) != std::string::npos);
    CHECK(q.text.find("try 6 * 4") != std::string::npos);
    CHECK(p.call_count() == 1);
  }
  SUBCASE("averaged vectors are normalized") {
    ScriptedProvider p(ProviderScript().embedding(vec({2, 0})).embedding(vec({0, 2})));
    const EngineContext ctx{p, PromptTemplates::builtin(), cfg};
    const auto q = form_query(prompt(), node, "", QueryMode::average_vectors, ctx);
    CHECK(q.vector[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(q.vector[1] == doctest::Approx(std::sqrt(0.5)));
    CHECK(p.call_log()[0].inputs.size() == 2);
  }
  SUBCASE("opposite vectors are degenerate") {
    ScriptedProvider p(ProviderScript().embedding(vec({1, 0})).embedding(vec({-1, 0})));
    const EngineContext ctx{p, PromptTemplates::builtin(), cfg};
    CHECK(kind_of([&] { form_query(prompt(), node, "", QueryMode::average_vectors, ctx); }) ==
          ErrorKind::degenerate_vector);
  }
}

TEST_CASE("a degenerate query skips retrieval and flags the node") {
  const auto lib = pattern_library(3, 2);
  ProviderScript s;
  s.respond(CallTag::strategy_gen, "a");
  s.embedding(vec({1, 0})).embedding(vec({-1, 0}));
  s.respond(CallTag::integration, "merged").respond(CallTag::final, "done");
  ScriptedProvider p(s);
  auto cfg = config(1, 1, 2);
  cfg.query_mode = QueryMode::average_vectors;
  const auto trace = run_ratt(prompt(), cfg, &lib, p);
  REQUIRE(trace.retrievals.size() == 1);
  CHECK(trace.retrievals[0].skip_reason == "degenerate query");
  CHECK(trace.retrievals[0].entries.empty());
  const auto node = layer_nodes(trace.tree, 1)[0];
  CHECK(node.has_flag("retrieval_skipped"));
  CHECK(node.text() == "a");
  CHECK(trace.totals.generate_calls == 3);
}

TEST_CASE("correct_node") {
  const RunConfig cfg = config(1, 1, 1);
  ThoughtNode node;
  node.raw_text = "draft";
  SUBCASE("no entries passes the text through without a call") {
    ScriptedProvider p(ProviderScript{});
    const EngineContext ctx{p, PromptTemplates::builtin(), cfg};
    const auto out = correct_node(node, RetrievalResult{}, "focus", prompt(), ctx);
    CHECK(out.refined_text == "draft");
    CHECK(p.call_count() == 0);
  }
  SUBCASE("entries are rendered into one correction call") {
    ScriptedProvider p(ProviderScript().respond(CallTag::correction, "better"));
    const EngineContext ctx{p, PromptTemplates::builtin(), cfg};
    RetrievalResult r;
    r.entries.push_back({"doc-a", 2, "six times four is twenty-four", 0.91, 0});
    const auto out = correct_node(node, r, "Check details.", prompt(), ctx);
    CHECK(out.refined_text == "better");
    CHECK(out.raw_text == "draft");
    const auto sent = p.call_log()[0].user_prompt;
    CHECK(sent.find("six times four is twenty-four") != std::string::npos);
    CHECK(sent.find("doc-a #2") != std::string::npos);
    CHECK(sent.find("0.91") != std::string::npos);
    CHECK(sent.find("Check details.") != std::string::npos);
  }
}

TEST_CASE("render_documents numbers the entries") {
  RetrievalResult r;
  r.entries.push_back({"x", 0, "first", 0.5, 0});
  r.entries.push_back({"y", 3, "second", 0.25, 1});
  CHECK(render_documents(r) == "[1] (x #0, similarity 0.50)\nfirst\n[2] (y #3, similarity 0.25)\nsecond\n");
}

TEST_CASE("integrate_layer") {
  const RunConfig cfg = config(2, 1, 0);
  SUBCASE("an empty layer is an invalid state") {
    ScriptedProvider p(ProviderScript{});
    const EngineContext ctx{p, PromptTemplates::builtin(), cfg};
    CHECK(kind_of([&] { integrate_layer({}, "", prompt(), ctx); }) == ErrorKind::invalid_state);
  }
  SUBCASE("candidates are listed by strategy index with refined text") {
    ScriptedProvider p(ProviderScript().respond(CallTag::integration, "merged"));
    const EngineContext ctx{p, PromptTemplates::builtin(), cfg};
    ThoughtNode a, b;
    a.strategy_index = 1;
    a.raw_text = "raw one";
    a.refined_text = "refined one";
    b.strategy_index = 0;
    b.raw_text = "raw zero";
    const auto out = integrate_layer({a, b}, "earlier", prompt(), ctx);
    CHECK(out.role == NodeRole::integrated);
    CHECK(out.raw_text == "merged");
    const auto sent = p.call_log()[0].user_prompt;
    const auto zero = sent.find("raw zero");
    const auto one = sent.find("refined one");
    REQUIRE(zero != std::string::npos);
    REQUIRE(one != std::string::npos);
    CHECK(zero < one);
    CHECK(sent.find("raw one") == std::string::npos);
    CHECK(sent.find("earlier") != std::string::npos);
  }
}

TEST_CASE("refined text is carried into later strategies of the same layer") {
  const auto lib = pattern_library(6, 4);
  ScriptedProvider p(ratt_script(2, 2, true, false, 4));
  run_ratt(prompt(), config(2, 2, 1), &lib, p);
  const auto calls = p.call_log();
  std::vector<CallRecord> gens;
  for (const auto& c : calls) {
    if (c.kind == CallKind::generate) gens.push_back(c);
  }
  // Layer 1: strategy, correction, strategy, correction, integration.
  CHECK(gens[2].tag == CallTag::strategy_gen);
  CHECK(gens[2].user_prompt.find("refined t1s0") != std::string::npos);
  // Layer 2 starts from the integrated text of layer 1 only.
  CHECK(gens[5].tag == CallTag::strategy_gen);
  CHECK(gens[5].user_prompt.find("integrated layer 1") != std::string::npos);
  CHECK(gens[5].user_prompt.find("refined t1s0") == std::string::npos);
}

TEST_CASE("bands follow the layer") {
  const auto lib = pattern_library(6, 4);
  ScriptedProvider p(ratt_script(1, 3, true, false, 4));
  const auto trace = run_ratt(prompt(), config(1, 3, 1), &lib, p);
  REQUIRE(trace.retrievals.size() == 3);
  CHECK(trace.retrievals[0].band == Band::broad);
  CHECK(trace.retrievals[1].band == Band::targeted);
  CHECK(trace.retrievals[2].band == Band::detailed);
  const auto policy = BandPolicy::for_iterations(3);
  CHECK(trace.retrievals[2].instruction == policy.instruction(Band::detailed));
  CHECK(trace.retrievals[0].query_text.find(policy.instruction(Band::broad)) != std::string::npos);
}

TEST_CASE("an empty or missing library skips retrieval") {
  const Library empty("scripted-embedding", 4, {});
  for (const Library* lib : {static_cast<const Library*>(nullptr), &empty}) {
    ScriptedProvider p(ratt_script(2, 1, false, false, 4));
    const auto trace = run_ratt(prompt(), config(2, 1, 3), lib, p);
    CHECK(trace.totals.generate_calls == 4);
    CHECK(trace.totals.embed_calls == 0);
    for (const auto& r : trace.retrievals) CHECK(r.skip_reason == (lib ? "empty library" : "no library"));
  }
}

TEST_CASE("a failed final call surfaces as RunError with the partial trace") {
  auto s = ratt_script(2, 1, false, false, 4);
  s.generations.pop_back();
  ScriptedProvider p(s);
  try {
    run_ratt(prompt(), config(2, 1, 0), nullptr, p);
    FAIL("expected RunError");
  } catch (const RunError& e) {
    CHECK(e.kind() == ErrorKind::script_mismatch);
    REQUIRE(e.trace());
    const auto& trace = *e.trace();
    CHECK(trace.error);
    CHECK(trace.calls.size() == 4);
    CHECK(trace.calls.back().error_kind == ErrorKind::script_mismatch);
    CHECK(trace.tree.size() == 4);
    CHECK(trace.final_answer.empty());
  }
}

TEST_CASE("a provider failure mid-layer keeps the nodes created so far") {
  ProviderScript s;
  s.respond(CallTag::strategy_gen, "first");
  s.generations.push_back({CallTag::strategy_gen, "", std::nullopt, ErrorKind::provider_unavailable, "down"});
  ScriptedProvider p(s);
  try {
    run_ratt(prompt(), config(2, 1, 0), nullptr, p);
    FAIL("expected RunError");
  } catch (const RunError& e) {
    CHECK(e.kind() == ErrorKind::provider_unavailable);
    CHECK(e.trace()->tree.size() == 2);
    CHECK(e.trace()->calls.size() == 2);
  }
}

TEST_CASE("property: generate call count over the grid") {
  const auto lib = pattern_library(12, 4);
  for (std::size_t m = 1; m <= 4; ++m) {
    for (std::size_t T = 1; T <= 4; ++T) {
      for (std::size_t k : {0u, 1u, 3u}) {
        for (bool la : {false, true}) {
          CAPTURE(m);
          CAPTURE(T);
          CAPTURE(k);
          CAPTURE(la);
          const bool retrieval = k > 0;
          ScriptedProvider p(ratt_script(m, T, retrieval, la, 4));
          const auto trace = run_ratt(prompt(), config(m, T, k, la), &lib, p);
          CHECK(trace.totals.generate_calls == ratt_generate_calls(m, T, retrieval, la));
          CHECK(count_kind(trace.calls, CallKind::generate) == trace.totals.generate_calls);
          CHECK(trace.totals.embed_calls == (retrieval ? m * T : 0));
          CHECK(trace.tree.size() == 1 + T * (m + 1) + 1);
          CHECK(trace.retrievals.size() == m * T);
          CHECK(p.remaining_generations() == 0);
        }
      }
    }
  }
}

TEST_CASE("property: every retrieved entry traces back to the library") {
  const auto lib = pattern_library(15, 4);
  ScriptedProvider p(ratt_script(3, 3, true, true, 4));
  const auto trace = run_ratt(prompt(), config(3, 3, 4, true), &lib, p);
  for (const auto& r : trace.retrievals) {
    CHECK(trace.tree.contains(r.node));
    const auto& node = trace.tree.node(r.node);
    CHECK(node.layer == r.layer);
    REQUIRE(node.retrieval_ref);
    CHECK(&trace.retrievals[*node.retrieval_ref] == &r);
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const auto& e = r.entries[i];
      CHECK(lib.doc_id(e.position) == e.doc_id);
      CHECK(lib.chunk_index(e.position) == e.chunk_index);
      CHECK(lib.text(e.position) == e.text);
      if (i > 0) CHECK(r.entries[i - 1].score >= e.score);
    }
  }
  // Integrated nodes chain the layers: root -> ... -> final.
  const auto leaves = trace.tree.leaves();
  std::size_t finals = 0;
  for (auto leaf : leaves) {
    if (trace.tree.node(leaf).role != NodeRole::final) continue;
    ++finals;
    const auto br = trace.tree.branch_of(leaf);
    REQUIRE(br.node_sequence.size() == 3 + 2);
    for (std::size_t i = 1; i + 1 < br.node_sequence.size(); ++i) {
      CHECK(trace.tree.node(br.node_sequence[i]).role == NodeRole::integrated);
    }
  }
  CHECK(finals == 1);
}

TEST_CASE("library snapshot reproduces retrieval") {
  const auto lib = pattern_library(30, 4);
  ScriptedProvider p(ratt_script(2, 2, true, false, 4));
  const auto trace = run_ratt(prompt(), config(2, 2, 3), &lib, p);
  REQUIRE(trace.library);
  CHECK(trace.library->total_chunks == 30);
  CHECK(trace.library->chunks.size() <= 30);
  const auto snap = trace.library->to_library();
  for (const auto& r : trace.retrievals) {
    const auto call = std::find_if(trace.calls.begin(), trace.calls.end(), [&](const CallRecord& c) {
      return c.kind == CallKind::embed && c.inputs.front() == r.query_text;
    });
    REQUIRE(call != trace.calls.end());
    const auto again = retrieve_top_k(snap, call->vectors.front(), r.k_requested);
    REQUIRE(again.entries.size() == r.entries.size());
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      CHECK(again.entries[i].doc_id == r.entries[i].doc_id);
      CHECK(again.entries[i].chunk_index == r.entries[i].chunk_index);
      CHECK(again.entries[i].score == r.entries[i].score);
    }
  }
}

TEST_CASE("templates render placeholders in one pass") {
  const auto& t = PromptTemplates::builtin();
  CHECK_FALSE(t.version.empty());
  CHECK_FALSE(t.strategies.empty());
  CHECK(t.strategy(t.strategies.size()) == t.strategy(0));
  PromptTemplates custom = t;
  custom.templates["probe"] = "A={a} B={b} C={c}";
  CHECK(custom.render("probe", {{"a", "{b}"}, {"b", "x"}}) == "A={b} B=x C={c}");
  CHECK(kind_of([&] { custom.render("missing", {}); }) == ErrorKind::invalid_config);
  CHECK(PromptTemplates::from_json(custom.to_json()) == custom);
}

TEST_CASE("method names round trip") {
  for (auto m : {Method::io, Method::cot, Method::cot_sc, Method::tot, Method::rat, Method::ratt}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK(kind_of([] { method_from_string("nosuch"); }) == ErrorKind::invalid_input);
  CHECK(query_mode_from_string(to_string(QueryMode::average_vectors)) == QueryMode::average_vectors);
}
