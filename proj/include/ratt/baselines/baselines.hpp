#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ratt/engine/ratt_engine.hpp"

namespace ratt {

/// Direct answer: one baseline call. Tree: root -> final.
RunTrace run_io(const TaskPrompt& prompt, Provider& provider,
                const RunConfig& config = {},
                const PromptTemplates& templates = PromptTemplates::builtin());

/// Step-by-step reasoning (one baseline call) followed by one final
/// extraction call. The reasoning becomes a chain of step nodes.
RunTrace run_cot(const TaskPrompt& prompt, Provider& provider,
                 const RunConfig& config = {},
                 const PromptTemplates& templates = PromptTemplates::builtin());

using AnswerNormalizer = std::function<std::string(std::string_view)>;

/// Trim, lowercase and drop trailing punctuation.
std::string normalize_answer(std::string_view answer);

/// Index of the most frequent normalized answer; ties go to the lowest index.
std::size_t majority_vote(const std::vector<std::string>& answers, const AnswerNormalizer& extract);

/// n_sc independent CoT chains (2 calls each), majority vote over their
/// normalized answers. The winning sample's raw answer is returned.
RunTrace run_cot_sc(const TaskPrompt& prompt, std::size_t n_sc, Provider& provider,
                    const AnswerNormalizer& extract = normalize_answer,
                    const RunConfig& config = {},
                    const PromptTemplates& templates = PromptTemplates::builtin());

/// Beam search over thoughts: every frontier node proposes b candidates, each
/// valued by a lookahead call; the best b of the layer (ties to the lower id)
/// form the next frontier. Generate calls: 2b + 2b^2(d-1) + 1.
RunTrace run_tot(const TaskPrompt& prompt, std::size_t b, std::size_t d, Provider& provider,
                 const RunConfig& config = {},
                 const PromptTemplates& templates = PromptTemplates::builtin());

/// Draft a chain of `steps` nodes, then revise each in order against its own
/// top-k retrieval, then answer from the revised chain. An empty library turns
/// revisions into pass-throughs.
RunTrace run_rat(const TaskPrompt& prompt, std::size_t steps, const Library& library,
                 std::size_t k, Provider& provider, const RunConfig& config = {},
                 const PromptTemplates& templates = PromptTemplates::builtin());

/// Splits reasoning text on "Step N:" markers (case-insensitive). Returns the
/// whole trimmed text as one step when there are no markers.
std::vector<std::string> split_steps(std::string_view reasoning);

/// Runs any method from its MethodConfig. rat requires a library; ratt
/// accepts none and then skips retrieval.
RunTrace run_method(const MethodConfig& config, const TaskPrompt& prompt, const Library* library,
                    Provider& provider,
                    const PromptTemplates& templates = PromptTemplates::builtin());

}  // namespace ratt
