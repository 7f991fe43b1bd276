#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ratt {

struct TextChunk {
  std::size_t offset = 0;  // in characters (UTF-8 code points)
  std::string text;

  friend bool operator==(const TextChunk&, const TextChunk&) = default;
};

struct ChunkOptions {
  std::size_t chunk_size = 1000;
  std::size_t overlap = 200;
};

/// Sliding-window split with stride chunk_size - overlap. Windows are measured
/// in UTF-8 code points so multi-byte characters are never cut. A trailing
/// window is produced only when it reaches characters the previous window did
/// not cover. Throws invalid_input unless chunk_size > overlap.
std::vector<TextChunk> chunk_text(std::string_view text, std::size_t chunk_size,
                                  std::size_t overlap);

inline std::vector<TextChunk> chunk_text(std::string_view text, const ChunkOptions& options) {
  return chunk_text(text, options.chunk_size, options.overlap);
}

/// Inverse of chunk_text: drops each later chunk's leading overlap.
std::string reassemble_chunks(const std::vector<TextChunk>& chunks, std::size_t overlap);

}  // namespace ratt
