#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ratt/core/thought_tree.hpp"
#include "ratt/engine/run_config.hpp"
#include "ratt/engine/templates.hpp"
#include "ratt/provider/provider.hpp"
#include "ratt/retrieval/library.hpp"

namespace ratt {

/// What one node asked of the library and what came back.
struct RetrievalRecord {
  NodeId node = 0;
  std::size_t layer = 0;
  std::optional<Band> band;  // unset for methods without bands
  std::string instruction;
  QueryMode mode = QueryMode::embed_concat_text;
  std::string query_text;
  std::size_t k_requested = 0;
  std::vector<RetrievalEntry> entries;
  // Set when no retrieval took place ("k=0", "no library", "empty library",
  // "degenerate query").
  std::optional<std::string> skip_reason;
};

/// The part of a library a run needs to be replayed: every chunk it
/// retrieved plus the library's first chunk. Exact top-k over any superset
/// of the true top-k returns the same entries, so retrieval over the
/// snapshot reproduces the run.
struct LibrarySnapshot {
  std::string embedder_id;
  std::size_t dimension = 0;
  std::size_t total_chunks = 0;
  std::vector<DocumentChunk> chunks;

  static LibrarySnapshot capture(const Library& library,
                                 const std::vector<RetrievalRecord>& retrievals);
  Library to_library() const;
};

struct RunTotals {
  std::size_t generate_calls = 0;
  std::size_t embed_calls = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct RunTrace {
  explicit RunTrace(ThoughtTree t) : tree(std::move(t)) {}

  MethodConfig config;
  PromptTemplates templates;
  TaskPrompt prompt;
  std::uint64_t seed = 0;
  std::optional<LibrarySnapshot> library;
  ThoughtTree tree;
  std::vector<RetrievalRecord> retrievals;
  std::vector<CallRecord> calls;  // indices are run-relative
  std::string final_answer;
  RunTotals totals;
  std::optional<std::string> error;
  double wall_ms = 0.0;

  Method method() const { return config.method; }
  std::size_t generate_call_count() const { return totals.generate_calls; }
};

/// A failed run. Carries the trace as it stood when the failure happened.
class RunError : public Error {
 public:
  RunError(const Error& cause, std::shared_ptr<const RunTrace> partial)
      : Error(cause.kind(), strip(cause)), trace_(std::move(partial)) {}

  const std::shared_ptr<const RunTrace>& trace() const { return trace_; }

 private:
  static std::string strip(const Error& e);
  std::shared_ptr<const RunTrace> trace_;
};

}  // namespace ratt
