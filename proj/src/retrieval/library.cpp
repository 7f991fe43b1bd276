#include "ratt/retrieval/library.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ratt/core/error.hpp"
#include "ratt/provider/provider.hpp"

namespace ratt {

namespace fs = std::filesystem;

Library::Library(std::string embedder_id, std::size_t dimension,
                 std::vector<DocumentChunk> chunks)
    : embedder_id_(std::move(embedder_id)), dimension_(dimension) {
  if (dimension_ == 0 && !chunks.empty()) {
    throw Error(ErrorKind::index_corruption, "library dimension must be positive");
  }
  std::sort(chunks.begin(), chunks.end(), [](const DocumentChunk& a, const DocumentChunk& b) {
    return std::tie(a.doc_id, a.chunk_index) < std::tie(b.doc_id, b.chunk_index);
  });
  const auto n = static_cast<Eigen::Index>(chunks.size());
  vectors_.resize(static_cast<Eigen::Index>(dimension_), n);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    auto& c = chunks[i];
    const std::string where = "chunk (" + c.doc_id + ", " + std::to_string(c.chunk_index) + ")";
    if (i > 0 && c.doc_id == doc_ids_.back() && c.chunk_index == chunk_indices_.back()) {
      throw Error(ErrorKind::index_corruption, "duplicate " + where);
    }
    if (static_cast<std::size_t>(c.vector.size()) != dimension_) {
      throw Error(ErrorKind::index_corruption, where + " has dimension " +
                                                   std::to_string(c.vector.size()) +
                                                   ", library has " + std::to_string(dimension_));
    }
    if (!all_finite(c.vector)) throw Error(ErrorKind::index_corruption, where + " is not finite");
    if (!(c.vector.cast<double>().norm() > 0.0)) {
      throw Error(ErrorKind::degenerate_vector, where + " has a zero-norm embedding");
    }
    if (c.text.empty()) throw Error(ErrorKind::index_corruption, where + " has empty text");
    vectors_.col(static_cast<Eigen::Index>(i)) = c.vector;
    doc_ids_.push_back(std::move(c.doc_id));
    chunk_indices_.push_back(c.chunk_index);
    texts_.push_back(std::move(c.text));
  }
}

DocumentChunk Library::chunk(std::size_t i) const {
  return {doc_ids_.at(i), chunk_indices_.at(i), texts_.at(i), vectors_.col(static_cast<Eigen::Index>(i))};
}

std::vector<DocumentChunk> Library::chunks() const {
  std::vector<DocumentChunk> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(chunk(i));
  return out;
}

RetrievalResult retrieve_top_k(const Library& library, const EmbeddingVector& query,
                               std::size_t k) {
  if (static_cast<std::size_t>(query.size()) != library.dimension() && !library.empty()) {
    throw Error(ErrorKind::invalid_input,
                "query dimension " + std::to_string(query.size()) + " does not match library dimension " +
                    std::to_string(library.dimension()));
  }
  RetrievalResult result;
  result.k_requested = k;
  if (k == 0 || library.empty()) return result;

  std::vector<double> scores(library.size());
  for (std::size_t i = 0; i < library.size(); ++i) {
    scores[i] = cosine_similarity(library.vector(i), query);
  }
  std::vector<std::size_t> order(library.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  result.entries.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = order[r];
    result.entries.push_back(
        {library.doc_id(i), library.chunk_index(i), library.text(i), scores[i], i});
  }
  return result;
}

Library build_index(std::vector<Document> documents, const IndexBuildOptions& options,
                    Provider& embedder) {
  if (documents.empty()) throw Error(ErrorKind::invalid_input, "no documents to index");
  if (options.batch_size == 0) throw Error(ErrorKind::invalid_input, "batch size must be positive");
  std::sort(documents.begin(), documents.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });

  std::vector<DocumentChunk> chunks;
  for (const auto& doc : documents) {
    const auto pieces = chunk_text(doc.text, options.chunking);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      chunks.push_back({doc.doc_id, static_cast<std::uint32_t>(i), pieces[i].text, {}});
    }
  }

  std::size_t dimension = 0;
  for (std::size_t begin = 0; begin < chunks.size(); begin += options.batch_size) {
    const std::size_t end = std::min(begin + options.batch_size, chunks.size());
    std::vector<std::string> texts;
    for (std::size_t i = begin; i < end; ++i) texts.push_back(chunks[i].text);
    std::vector<EmbeddingVector> vectors;
    try {
      vectors = embedder.embed(texts);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " (embedded " + std::to_string(begin) +
                                " of " + std::to_string(chunks.size()) + " chunks)");
    }
    for (std::size_t i = begin; i < end; ++i) {
      auto& v = vectors[i - begin];
      if (dimension == 0) dimension = static_cast<std::size_t>(v.size());
      if (static_cast<std::size_t>(v.size()) != dimension) {
        throw Error(ErrorKind::index_corruption,
                    "embedder returned dimension " + std::to_string(v.size()) + " after " +
                        std::to_string(dimension) + " (chunk " + std::to_string(i) + ")");
      }
      chunks[i].vector = std::move(v);
    }
  }
  return Library(embedder.embedding_model(), dimension, std::move(chunks));
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<Document> load_documents(const std::string& path) {
  const fs::path root(path);
  std::error_code ec;
  if (!fs::exists(root, ec)) throw Error(ErrorKind::io, "input path does not exist: " + path);

  std::vector<Document> docs;
  if (fs::is_directory(root, ec)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      docs.push_back({fs::relative(entry.path(), root).generic_string(), read_file(entry.path())});
    }
  } else {
    std::istringstream lines(read_file(root));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto rec = nlohmann::json::parse(line);
        docs.push_back({rec.at("id").get<std::string>(), rec.at("text").get<std::string>()});
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input,
                    path + ":" + std::to_string(line_no) + ": bad record: " + e.what());
      }
    }
  }
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  return docs;
}

}  // namespace ratt
