#include "ratt/engine/session.hpp"

namespace ratt {

RunSession::RunSession(const TaskPrompt& prompt, const MethodConfig& config, Provider& provider,
                       const PromptTemplates& templates, const Library* library)
    : trace_(ThoughtTree::create(prompt)),
      provider_(provider),
      library_(library),
      log_start_(provider.call_count()),
      started_(std::chrono::steady_clock::now()) {
  trace_.config = config;
  trace_.templates = templates;
  trace_.prompt = prompt;
}

std::size_t RunSession::add_retrieval(RetrievalRecord record) {
  trace_.retrievals.push_back(std::move(record));
  return trace_.retrievals.size() - 1;
}

void RunSession::seal() {
  const auto log = provider_.call_log();
  trace_.calls.assign(log.begin() + static_cast<std::ptrdiff_t>(std::min(log_start_, log.size())),
                      log.end());
  trace_.totals = {};
  for (std::size_t i = 0; i < trace_.calls.size(); ++i) {
    auto& c = trace_.calls[i];
    c.index = i;
    if (c.kind == CallKind::generate) ++trace_.totals.generate_calls;
    else ++trace_.totals.embed_calls;
    trace_.totals.prompt_tokens += c.prompt_tokens;
    trace_.totals.completion_tokens += c.completion_tokens;
  }
  if (library_) trace_.library = LibrarySnapshot::capture(*library_, trace_.retrievals);
  trace_.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started_).count();
}

RunTrace RunSession::finish(std::string final_answer) {
  trace_.final_answer = std::move(final_answer);
  seal();
  return std::move(trace_);
}

void RunSession::abort(const Error& cause) {
  trace_.error = cause.what();
  seal();
  throw RunError(cause, std::make_shared<const RunTrace>(std::move(trace_)));
}

}  // namespace ratt
