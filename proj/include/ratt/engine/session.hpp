#pragma once

#include <chrono>
#include <string>

#include "ratt/engine/run_trace.hpp"

namespace ratt {

/// Bookkeeping shared by every method runner: owns the tree and retrieval
/// records while a run is in flight and turns them into a RunTrace, either
/// on success or attached to a RunError.
class RunSession {
 public:
  RunSession(const TaskPrompt& prompt, const MethodConfig& config, Provider& provider,
             const PromptTemplates& templates, const Library* library);

  ThoughtTree& tree() { return trace_.tree; }
  Provider& provider() { return provider_; }
  const PromptTemplates& templates() const { return trace_.templates; }
  const TaskPrompt& prompt() const { return trace_.prompt; }
  const MethodConfig& config() const { return trace_.config; }
  const Library* library() const { return library_; }

  std::size_t add_retrieval(RetrievalRecord record);

  RunTrace finish(std::string final_answer);

  /// Throws RunError wrapping `cause` with the trace so far.
  [[noreturn]] void abort(const Error& cause);

 private:
  void seal();

  RunTrace trace_;
  Provider& provider_;
  const Library* library_;
  std::size_t log_start_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace ratt
