#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ratt/engine/run_trace.hpp"

namespace ratt {

/// What the individual RATT steps need besides their direct inputs.
struct EngineContext {
  Provider& provider;
  const PromptTemplates& templates;
  const RunConfig& config;
};

/// One strategy generation conditioned on the carried context (empty on the
/// first iteration). Issues one strategy_gen call.
std::string generate_strategy_thought(const TaskPrompt& prompt, std::string_view context,
                                      std::size_t strategy_index, const EngineContext& ctx);

/// m detached strategy nodes from the same context, strategy_index 0..m-1.
/// All-or-nothing: a provider failure discards the nodes generated so far.
std::vector<ThoughtNode> generate_strategy_nodes(std::string_view context, const TaskPrompt& prompt,
                                                 std::size_t m, const EngineContext& ctx);

struct LookaheadResult {
  double score = 0.5;
  bool parse_warning = false;
};

/// First integer in the text, if it lies in 0..10, scaled to [0, 1];
/// otherwise 0.5 with a warning.
LookaheadResult parse_lookahead(std::string_view response);

/// One lookahead call judging the node's promise.
LookaheadResult lookahead_score(const ThoughtNode& node, const TaskPrompt& prompt,
                                const EngineContext& ctx);

struct FormedQuery {
  EmbeddingVector vector;
  std::string text;
};

/// embed_concat_text embeds "instruction, prompt, node" as one string;
/// average_vectors embeds prompt and node separately and returns their
/// normalized mean (degenerate_vector if the mean vanishes).
FormedQuery form_query(const TaskPrompt& prompt, const ThoughtNode& node,
                       std::string_view band_instruction, QueryMode mode, const EngineContext& ctx);

/// Rewrites the node against the retrieved chunks (one correction call).
/// An empty retrieval passes the raw text through without calling the model.
ThoughtNode correct_node(ThoughtNode node, const RetrievalResult& retrieved,
                         std::string_view band_instruction, const TaskPrompt& prompt,
                         const EngineContext& ctx);

/// Merges a layer's refined nodes into the detached integrated node n_t*
/// (one integration call). Throws invalid_state for an empty layer.
ThoughtNode integrate_layer(const std::vector<ThoughtNode>& refined, std::string_view previous,
                            const TaskPrompt& prompt, const EngineContext& ctx);

/// The task-formatted answer (one final call), returned verbatim.
std::string finalize(const ThoughtNode& last_integrated, const TaskPrompt& prompt,
                     const EngineContext& ctx);

/// Full RATT run. Generate calls: T * (m + m*c + m*a) + T + 1, where c is 1
/// when retrieval is active (k > 0 and a non-empty library) and a is 1 when
/// lookahead is enabled. Failures surface as RunError with the partial trace.
RunTrace run_ratt(const TaskPrompt& prompt, const RunConfig& config, const Library* library,
                  Provider& provider,
                  const PromptTemplates& templates = PromptTemplates::builtin());

/// Text of the documents block used in correction prompts.
std::string render_documents(const RetrievalResult& retrieved);

}  // namespace ratt
