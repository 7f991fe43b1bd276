#include "ratt/engine/ratt_engine.hpp"

#include <cctype>
#include <cstdio>

#include "ratt/engine/session.hpp"

namespace ratt {

namespace {

std::string generate(const EngineContext& ctx, CallTag tag, std::string prompt) {
  GenerationRequest req;
  req.system_instruction = ctx.templates.system;
  req.user_prompt = std::move(prompt);
  req.temperature = ctx.config.temperatures.for_tag(tag);
  req.max_tokens = ctx.config.max_tokens;
  req.call_tag = tag;
  return ctx.provider.generate(req);
}

std::string context_block(std::string_view context) {
  if (context.empty()) return {};
  return "Reasoning so far:\n" + std::string(context) + "\n\n";
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string append_context(std::string context, const std::string& text) {
  if (!context.empty()) context += "\n\n";
  context += text;
  return context;
}

}  // namespace

std::string render_documents(const RetrievalResult& retrieved) {
  std::string out;
  for (std::size_t i = 0; i < retrieved.entries.size(); ++i) {
    const auto& e = retrieved.entries[i];
    out += "[" + std::to_string(i + 1) + "] (" + e.doc_id + " #" + std::to_string(e.chunk_index) +
           ", similarity " + fixed2(e.score) + ")\n" + e.text + "\n";
  }
  return out;
}

std::string generate_strategy_thought(const TaskPrompt& prompt, std::string_view context,
                                      std::size_t strategy_index, const EngineContext& ctx) {
  return generate(ctx, CallTag::strategy_gen,
                  ctx.templates.render("strategy_gen", {{"prompt", prompt.text},
                                                        {"context_block", context_block(context)},
                                                        {"strategy", ctx.templates.strategy(strategy_index)}}));
}

std::vector<ThoughtNode> generate_strategy_nodes(std::string_view context, const TaskPrompt& prompt,
                                                 std::size_t m, const EngineContext& ctx) {
  if (m < 1) throw Error(ErrorKind::invalid_config, "m must be at least 1");
  std::vector<ThoughtNode> nodes;
  for (std::size_t l = 0; l < m; ++l) {
    ThoughtNode n;
    n.role = NodeRole::strategy;
    n.strategy_index = l;
    n.raw_text = generate_strategy_thought(prompt, context, l, ctx);
    nodes.push_back(std::move(n));
  }
  return nodes;
}

LookaheadResult parse_lookahead(std::string_view response) {
  std::size_t i = 0;
  while (i < response.size() && !std::isdigit(static_cast<unsigned char>(response[i]))) ++i;
  std::size_t j = i;
  while (j < response.size() && std::isdigit(static_cast<unsigned char>(response[j])) && j - i < 3) ++j;
  if (i == j || (j < response.size() && std::isdigit(static_cast<unsigned char>(response[j])))) {
    return {0.5, true};
  }
  const int value = std::stoi(std::string(response.substr(i, j - i)));
  if (value > 10) return {0.5, true};
  return {value / 10.0, false};
}

LookaheadResult lookahead_score(const ThoughtNode& node, const TaskPrompt& prompt,
                                const EngineContext& ctx) {
  const auto text = generate(ctx, CallTag::lookahead,
                             ctx.templates.render("lookahead", {{"prompt", prompt.text},
                                                                {"thought", node.raw_text}}));
  return parse_lookahead(text);
}

FormedQuery form_query(const TaskPrompt& prompt, const ThoughtNode& node,
                       std::string_view band_instruction, QueryMode mode, const EngineContext& ctx) {
  FormedQuery q;
  if (mode == QueryMode::embed_concat_text) {
    q.text = ctx.templates.render("query", {{"band_instruction", std::string(band_instruction)},
                                            {"prompt", prompt.text},
                                            {"thought", node.raw_text}});
    q.vector = ctx.provider.embed({q.text}).front();
    return q;
  }
  q.text = prompt.text + "\n\n" + node.raw_text;
  const auto vs = ctx.provider.embed({prompt.text, node.raw_text});
  const Eigen::VectorXd mean = (vs[0].cast<double>() + vs[1].cast<double>()) / 2.0;
  q.vector = normalized(mean).cast<float>();
  return q;
}

ThoughtNode correct_node(ThoughtNode node, const RetrievalResult& retrieved,
                         std::string_view band_instruction, const TaskPrompt& prompt,
                         const EngineContext& ctx) {
  if (retrieved.entries.empty()) {
    node.refined_text = node.raw_text;
    return node;
  }
  std::string focus;
  if (!band_instruction.empty()) focus = "Retrieval focus: " + std::string(band_instruction) + "\n\n";
  node.refined_text = generate(ctx, CallTag::correction,
                               ctx.templates.render("correction", {{"prompt", prompt.text},
                                                                   {"thought", node.raw_text},
                                                                   {"focus_block", focus},
                                                                   {"documents", render_documents(retrieved)}}));
  return node;
}

ThoughtNode integrate_layer(const std::vector<ThoughtNode>& refined, std::string_view previous,
                            const TaskPrompt& prompt, const EngineContext& ctx) {
  if (refined.empty()) throw Error(ErrorKind::invalid_state, "cannot integrate an empty layer");
  std::vector<const ThoughtNode*> ordered;
  for (const auto& n : refined) ordered.push_back(&n);
  std::stable_sort(ordered.begin(), ordered.end(), [](const ThoughtNode* a, const ThoughtNode* b) {
    return a->strategy_index < b->strategy_index;
  });
  std::string candidates;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto& n = *ordered[i];
    candidates += "Candidate " + std::to_string(i + 1) + " (strategy " + std::to_string(n.strategy_index);
    if (n.lookahead_score) candidates += ", lookahead score " + fixed2(*n.lookahead_score);
    candidates += "):\n" + n.text() + "\n\n";
  }
  ThoughtNode out;
  out.role = NodeRole::integrated;
  out.strategy_index = refined.size();
  out.raw_text = generate(ctx, CallTag::integration,
                          ctx.templates.render("integration", {{"prompt", prompt.text},
                                                               {"context_block", context_block(previous)},
                                                               {"candidates", candidates}}));
  return out;
}

std::string finalize(const ThoughtNode& last_integrated, const TaskPrompt& prompt,
                     const EngineContext& ctx) {
  return generate(ctx, CallTag::final,
                  ctx.templates.render("final", {{"prompt", prompt.text},
                                                 {"reasoning", last_integrated.text()},
                                                 {"format_hint", ctx.templates.format_hint(prompt.task_kind)}}));
}

RunTrace run_ratt(const TaskPrompt& prompt, const RunConfig& config, const Library* library,
                  Provider& provider, const PromptTemplates& templates) {
  prompt.validate();
  config.validate();
  MethodConfig mc;
  mc.method = Method::ratt;
  mc.engine = config;
  RunSession session(prompt, mc, provider, templates, library);
  const EngineContext ctx{provider, templates, config};
  const BandPolicy policy = config.effective_band_policy();
  const bool retrieval_active = config.k > 0 && library != nullptr && !library->empty();

  try {
    ThoughtTree& tree = session.tree();
    NodeId parent = tree.root_id();
    std::string previous;

    for (std::size_t t = 1; t <= config.T; ++t) {
      const BandSelection band = band_for_layer(policy, t, config.T);
      std::string context = previous;
      std::vector<ThoughtNode> refined;

      for (std::size_t l = 0; l < config.m; ++l) {
        const std::string raw = generate_strategy_thought(prompt, context, l, ctx);
        const NodeId id = tree.add_node(parent, raw, l, NodeRole::strategy);
        ThoughtNode work = tree.node(id);

        if (config.lookahead_enabled) {
          const auto la = lookahead_score(work, prompt, ctx);
          work.lookahead_score = la.score;
          if (la.parse_warning) work.flags.emplace_back("lookahead_parse_warning");
        }

        RetrievalRecord record;
        record.node = id;
        record.layer = t;
        record.band = band.band;
        record.instruction = band.instruction;
        record.mode = config.query_mode;
        record.k_requested = config.k;
        RetrievalResult retrieved;
        retrieved.k_requested = config.k;
        if (!retrieval_active) {
          record.skip_reason = config.k == 0 ? "k=0" : (library == nullptr ? "no library" : "empty library");
        } else {
          try {
            const FormedQuery q = form_query(prompt, work, band.instruction, config.query_mode, ctx);
            record.query_text = q.text;
            retrieved = retrieve_top_k(*library, q.vector, config.k);
            record.entries = retrieved.entries;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate_vector) throw;
            record.skip_reason = "degenerate query";
            retrieved.entries.clear();
          }
        }
        if (record.skip_reason) work.flags.emplace_back("retrieval_skipped");
        work.retrieval_ref = session.add_retrieval(std::move(record));

        work = correct_node(std::move(work), retrieved, band.instruction, prompt, ctx);
        context = append_context(std::move(context), work.text());
        tree.node(id) = work;
        refined.push_back(std::move(work));
      }

      const ThoughtNode integrated = integrate_layer(refined, previous, prompt, ctx);
      parent = tree.add_node(parent, integrated.raw_text, integrated.strategy_index,
                             NodeRole::integrated);
      previous = integrated.raw_text;
    }

    const std::string answer = finalize(tree.node(parent), prompt, ctx);
    tree.add_node(parent, answer, 0, NodeRole::final);
    return session.finish(answer);
  } catch (const RunError&) {
    throw;
  } catch (const Error& e) {
    session.abort(e);
  }
}

}  // namespace ratt
