#include "ratt/baselines/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

#include "ratt/engine/session.hpp"

namespace ratt {

namespace {

std::string call(RunSession& s, CallTag tag, double temperature, std::string prompt) {
  GenerationRequest req;
  req.system_instruction = s.templates().system;
  req.user_prompt = std::move(prompt);
  req.temperature = temperature;
  req.max_tokens = s.config().engine.max_tokens;
  req.call_tag = tag;
  return s.provider().generate(req);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string join_texts(const ThoughtTree& tree, const std::vector<NodeId>& ids) {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out += "\n";
    out += tree.node(id).text();
  }
  return out;
}

std::string final_call(RunSession& s, const std::string& reasoning) {
  return call(s, CallTag::final, s.config().engine.temperatures.final,
              s.templates().render("final", {{"prompt", s.prompt().text},
                                             {"reasoning", reasoning},
                                             {"format_hint", s.templates().format_hint(s.prompt().task_kind)}}));
}

MethodConfig method_config(Method method, const RunConfig& config, BaselineConfig baseline = {}) {
  MethodConfig mc;
  mc.method = method;
  mc.engine = config;
  mc.baseline = baseline;
  return mc;
}

// Chain of step nodes under `parent`; returns their ids in order.
std::vector<NodeId> add_chain(ThoughtTree& tree, NodeId parent, const std::vector<std::string>& steps) {
  std::vector<NodeId> ids;
  for (const auto& step : steps) {
    parent = tree.add_node(parent, step, 0, NodeRole::strategy);
    ids.push_back(parent);
  }
  return ids;
}

template <typename Body>
RunTrace guarded(RunSession& session, Body&& body) {
  try {
    return body();
  } catch (const RunError&) {
    throw;
  } catch (const Error& e) {
    session.abort(e);
  }
}

}  // namespace

std::vector<std::string> split_steps(std::string_view reasoning) {
  static const std::regex marker(R"(step\s*\d+\s*[:.)])", std::regex::icase);
  const std::string text(reasoning);
  std::vector<std::string> steps;
  std::vector<std::size_t> starts;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), marker); it != std::sregex_iterator(); ++it) {
    starts.push_back(static_cast<std::size_t>(it->position()));
  }
  if (starts.empty()) {
    const auto whole = trim(text);
    if (!whole.empty()) steps.push_back(whole);
    return steps;
  }
  // Text ahead of the first marker is preamble and is kept with step one.
  starts.front() = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::size_t end = i + 1 < starts.size() ? starts[i + 1] : text.size();
    auto piece = trim(std::string_view(text).substr(starts[i], end - starts[i]));
    if (!piece.empty()) steps.push_back(std::move(piece));
  }
  return steps;
}

std::string normalize_answer(std::string_view answer) {
  std::string s = trim(answer);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) && s.back() != ')' &&
         s.back() != ']' && s.back() != '}') {
    s.pop_back();
  }
  return trim(s);
}

std::size_t majority_vote(const std::vector<std::string>& answers, const AnswerNormalizer& extract) {
  if (answers.empty()) throw Error(ErrorKind::invalid_input, "no answers to vote on");
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> keys;
  for (const auto& a : answers) {
    keys.push_back(extract(a));
    ++counts[keys.back()];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (counts[keys[i]] > counts[keys[best]]) best = i;
  }
  return best;
}

RunTrace run_io(const TaskPrompt& prompt, Provider& provider, const RunConfig& config,
                const PromptTemplates& templates) {
  prompt.validate();
  RunSession s(prompt, method_config(Method::io, config), provider, templates, nullptr);
  return guarded(s, [&] {
    const auto answer = call(s, CallTag::baseline, config.temperatures.baseline,
                             templates.render("io", {{"prompt", prompt.text},
                                                     {"format_hint", templates.format_hint(prompt.task_kind)}}));
    s.tree().add_node(s.tree().root_id(), answer, 0, NodeRole::final);
    return s.finish(answer);
  });
}

namespace {

// One CoT sample under the root: reasoning call, chain, extraction call.
// Returns (answer, id of the last node added).
std::pair<std::string, NodeId> cot_sample(RunSession& s, std::size_t sample, double temperature) {
  const auto reasoning = call(s, CallTag::baseline, temperature,
                              s.templates().render("cot", {{"prompt", s.prompt().text}}));
  auto steps = split_steps(reasoning);
  if (steps.empty()) steps.push_back(reasoning.empty() ? std::string("(empty)") : reasoning);
  auto& tree = s.tree();
  auto ids = add_chain(tree, tree.root_id(), steps);
  for (auto id : ids) tree.node(id).strategy_index = sample;
  const auto answer = final_call(s, reasoning);
  return {answer, ids.back()};
}

}  // namespace

RunTrace run_cot(const TaskPrompt& prompt, Provider& provider, const RunConfig& config,
                 const PromptTemplates& templates) {
  prompt.validate();
  RunSession s(prompt, method_config(Method::cot, config), provider, templates, nullptr);
  return guarded(s, [&] {
    auto [answer, last] = cot_sample(s, 0, config.temperatures.baseline);
    s.tree().add_node(last, answer, 0, NodeRole::final);
    return s.finish(answer);
  });
}

RunTrace run_cot_sc(const TaskPrompt& prompt, std::size_t n_sc, Provider& provider,
                    const AnswerNormalizer& extract, const RunConfig& config,
                    const PromptTemplates& templates) {
  prompt.validate();
  BaselineConfig bc;
  bc.n_sc = n_sc;
  bc.validate();
  RunSession s(prompt, method_config(Method::cot_sc, config, bc), provider, templates, nullptr);
  return guarded(s, [&] {
    std::vector<std::string> answers;
    std::vector<NodeId> answer_nodes;
    auto& tree = s.tree();
    for (std::size_t i = 0; i < n_sc; ++i) {
      auto [answer, last] = cot_sample(s, i, config.temperatures.sampling);
      const auto id = tree.add_node(last, answer, i, NodeRole::strategy);
      tree.node(id).flags.emplace_back("sample_answer");
      answers.push_back(std::move(answer));
      answer_nodes.push_back(id);
    }
    const auto winner = majority_vote(answers, extract);
    const std::string answer = answers[winner];
    tree.add_node(answer_nodes[winner], answer, winner, NodeRole::final);
    return s.finish(answer);
  });
}

RunTrace run_tot(const TaskPrompt& prompt, std::size_t b, std::size_t d, Provider& provider,
                 const RunConfig& config, const PromptTemplates& templates) {
  prompt.validate();
  BaselineConfig bc;
  bc.tot_b = b;
  bc.tot_d = d;
  bc.validate();
  RunSession s(prompt, method_config(Method::tot, config, bc), provider, templates, nullptr);
  return guarded(s, [&] {
    auto& tree = s.tree();
    auto branch_text = [&](NodeId id) {
      std::vector<NodeId> path;
      for (NodeId cur = id; cur != tree.root_id(); cur = *tree.parent_of(cur)) path.push_back(cur);
      std::reverse(path.begin(), path.end());
      return join_texts(tree, path);
    };

    std::vector<NodeId> frontier{tree.root_id()};
    for (std::size_t depth = 1; depth <= d; ++depth) {
      std::vector<NodeId> candidates;
      for (const NodeId parent : frontier) {
        const std::string so_far = parent == tree.root_id() ? std::string() : branch_text(parent);
        for (std::size_t j = 0; j < b; ++j) {
          const auto thought = call(
              s, CallTag::baseline, config.temperatures.sampling,
              templates.render("tot_propose",
                               {{"prompt", prompt.text},
                                {"context_block", so_far.empty() ? std::string() : "Reasoning so far:\n" + so_far + "\n\n"}}));
          const auto id = tree.add_node(parent, thought, j, NodeRole::strategy);
          const auto value = parse_lookahead(call(
              s, CallTag::lookahead, config.temperatures.lookahead,
              templates.render("lookahead", {{"prompt", prompt.text}, {"thought", branch_text(id)}})));
          tree.node(id).lookahead_score = value.score;
          if (value.parse_warning) tree.node(id).flags.emplace_back("lookahead_parse_warning");
          candidates.push_back(id);
        }
      }
      std::stable_sort(candidates.begin(), candidates.end(), [&](NodeId x, NodeId y) {
        const double sx = *tree.node(x).lookahead_score;
        const double sy = *tree.node(y).lookahead_score;
        if (sx != sy) return sx > sy;
        return x < y;
      });
      candidates.resize(std::min(candidates.size(), b));
      frontier = std::move(candidates);
    }
    const NodeId best = frontier.front();
    const auto answer = final_call(s, branch_text(best));
    tree.add_node(best, answer, 0, NodeRole::final);
    return s.finish(answer);
  });
}

RunTrace run_rat(const TaskPrompt& prompt, std::size_t steps, const Library& library,
                 std::size_t k, Provider& provider, const RunConfig& config,
                 const PromptTemplates& templates) {
  prompt.validate();
  BaselineConfig bc;
  bc.rat_steps = steps;
  bc.rat_k = k;
  bc.validate();
  RunConfig engine = config;
  engine.k = k;
  RunSession s(prompt, method_config(Method::rat, config, bc), provider, templates, &library);
  const EngineContext ctx{provider, templates, engine};
  return guarded(s, [&] {
    auto& tree = s.tree();
    const auto draft = call(s, CallTag::baseline, config.temperatures.baseline,
                            templates.render("rat_draft", {{"prompt", prompt.text},
                                                           {"steps", std::to_string(steps)}}));
    auto pieces = split_steps(draft);
    if (pieces.empty()) pieces.push_back(draft.empty() ? std::string("(empty)") : draft);
    // Surplus steps fold into the last one so the chain never exceeds `steps`.
    while (pieces.size() > steps) {
      pieces[pieces.size() - 2] += "\n" + pieces.back();
      pieces.pop_back();
    }
    const auto ids = add_chain(tree, tree.root_id(), pieces);
    const bool active = k > 0 && !library.empty();

    for (const NodeId id : ids) {
      ThoughtNode work = tree.node(id);
      RetrievalRecord record;
      record.node = id;
      record.layer = work.layer;
      record.mode = QueryMode::embed_concat_text;
      record.k_requested = k;
      RetrievalResult retrieved;
      if (!active) {
        record.skip_reason = k == 0 ? "k=0" : "empty library";
      } else {
        try {
          const auto q = form_query(prompt, work, "", QueryMode::embed_concat_text, ctx);
          record.query_text = q.text;
          retrieved = retrieve_top_k(library, q.vector, k);
          record.entries = retrieved.entries;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::degenerate_vector) throw;
          record.skip_reason = "degenerate query";
        }
      }
      if (record.skip_reason) work.flags.emplace_back("retrieval_skipped");
      work.retrieval_ref = s.add_retrieval(std::move(record));
      work = correct_node(std::move(work), retrieved, "", prompt, ctx);
      tree.node(id) = std::move(work);
    }
    const auto answer = final_call(s, join_texts(tree, ids));
    tree.add_node(ids.back(), answer, 0, NodeRole::final);
    return s.finish(answer);
  });
}

RunTrace run_method(const MethodConfig& config, const TaskPrompt& prompt, const Library* library,
                    Provider& provider, const PromptTemplates& templates) {
  config.baseline.validate();
  const auto& e = config.engine;
  switch (config.method) {
    case Method::io: return run_io(prompt, provider, e, templates);
    case Method::cot: return run_cot(prompt, provider, e, templates);
    case Method::cot_sc: return run_cot_sc(prompt, config.baseline.n_sc, provider, normalize_answer, e, templates);
    case Method::tot: return run_tot(prompt, config.baseline.tot_b, config.baseline.tot_d, provider, e, templates);
    case Method::rat:
      if (library == nullptr) throw Error(ErrorKind::invalid_config, "rat needs a library");
      return run_rat(prompt, config.baseline.rat_steps, *library, config.baseline.rat_k, provider, e, templates);
    case Method::ratt: return run_ratt(prompt, e, library, provider, templates);
  }
  throw Error(ErrorKind::invalid_config, "unknown method");
}

}  // namespace ratt
