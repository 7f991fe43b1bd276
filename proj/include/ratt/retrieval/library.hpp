#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratt/retrieval/chunking.hpp"
#include "ratt/retrieval/embedding.hpp"

namespace ratt {

class Provider;

struct DocumentChunk {
  std::string doc_id;
  std::uint32_t chunk_index = 0;
  std::string text;
  EmbeddingVector vector;
};

struct Document {
  std::string doc_id;
  std::string text;
};

/// Immutable, exhaustively searched embedding store.
///
/// Chunk vectors live column-wise in one K x N matrix. Chunks are kept sorted
/// by (doc_id, chunk_index), so a chunk's position doubles as its tie-break
/// rank during retrieval.
class Library {
 public:
  Library() = default;

  /// Validates and sorts. Throws index_corruption on dimension disagreement,
  /// non-finite values or duplicate (doc_id, chunk_index) keys, and
  /// degenerate_vector on a zero-norm chunk vector.
  Library(std::string embedder_id, std::size_t dimension, std::vector<DocumentChunk> chunks);

  std::size_t size() const { return doc_ids_.size(); }
  bool empty() const { return doc_ids_.empty(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& embedder_id() const { return embedder_id_; }

  const std::string& doc_id(std::size_t i) const { return doc_ids_[i]; }
  std::uint32_t chunk_index(std::size_t i) const { return chunk_indices_[i]; }
  const std::string& text(std::size_t i) const { return texts_[i]; }
  auto vector(std::size_t i) const { return vectors_.col(static_cast<Eigen::Index>(i)); }
  const Eigen::MatrixXf& vectors() const { return vectors_; }

  DocumentChunk chunk(std::size_t i) const;
  std::vector<DocumentChunk> chunks() const;

  friend bool operator==(const Library& a, const Library& b) {
    return a.embedder_id_ == b.embedder_id_ && a.dimension_ == b.dimension_ &&
           a.doc_ids_ == b.doc_ids_ && a.chunk_indices_ == b.chunk_indices_ &&
           a.texts_ == b.texts_ && a.vectors_ == b.vectors_;
  }

 private:
  std::string embedder_id_;
  std::size_t dimension_ = 0;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> chunk_indices_;
  std::vector<std::string> texts_;
  Eigen::MatrixXf vectors_;
};

struct RetrievalEntry {
  std::string doc_id;
  std::uint32_t chunk_index = 0;
  std::string text;
  double score = 0.0;
  std::size_t position = 0;  // index into the library

  friend bool operator==(const RetrievalEntry&, const RetrievalEntry&) = default;
};

struct RetrievalResult {
  std::vector<RetrievalEntry> entries;
  std::size_t k_requested = 0;
};

/// Exact top-k by cosine similarity; ties resolved by (doc_id, chunk_index).
/// Throws invalid_input on dimension mismatch, degenerate_vector on a zero query.
RetrievalResult retrieve_top_k(const Library& library, const EmbeddingVector& query,
                               std::size_t k);

struct IndexBuildOptions {
  ChunkOptions chunking;
  std::size_t batch_size = 32;
};

/// Chunks and embeds every document. Chunks are embedded in (doc_id,
/// chunk_index) order in batches, so the resulting library does not depend on
/// how the provider schedules requests.
Library build_index(std::vector<Document> documents, const IndexBuildOptions& options,
                    Provider& embedder);

/// Loads a directory of UTF-8 text files (doc_id = relative path with '/'
/// separators) or a JSON-lines file of {"id", "text"} records.
std::vector<Document> load_documents(const std::string& path);

}  // namespace ratt
