#include "ratt/retrieval/chunking.hpp"

#include "ratt/core/error.hpp"

namespace ratt {

namespace {

// Byte offsets of every code point start, plus a final entry at text.size().
// Stray continuation bytes count as characters of their own.
std::vector<std::size_t> code_point_starts(std::string_view text) {
  std::vector<std::size_t> starts;
  starts.reserve(text.size() + 1);
  std::size_t i = 0;
  while (i < text.size()) {
    starts.push_back(i);
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    std::size_t j = 1;
    while (j < len && i + j < text.size() &&
           (static_cast<unsigned char>(text[i + j]) & 0xC0) == 0x80) {
      ++j;
    }
    i += j;
  }
  starts.push_back(text.size());
  return starts;
}

}  // namespace

std::vector<TextChunk> chunk_text(std::string_view text, std::size_t chunk_size,
                                  std::size_t overlap) {
  if (chunk_size == 0 || overlap >= chunk_size) {
    throw Error(ErrorKind::invalid_input, "chunk_size must exceed overlap (got size " +
                                              std::to_string(chunk_size) + ", overlap " +
                                              std::to_string(overlap) + ")");
  }
  const auto starts = code_point_starts(text);
  const std::size_t n = starts.size() - 1;
  const std::size_t stride = chunk_size - overlap;

  std::vector<TextChunk> out;
  for (std::size_t start = 0; start < n; start += stride) {
    const std::size_t end = std::min(start + chunk_size, n);
    out.push_back({start, std::string(text.substr(starts[start], starts[end] - starts[start]))});
    if (end == n) break;
  }
  return out;
}

std::string reassemble_chunks(const std::vector<TextChunk>& chunks, std::size_t overlap) {
  std::string out;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const std::string& t = chunks[i].text;
    if (i == 0) {
      out += t;
      continue;
    }
    const auto starts = code_point_starts(t);
    const std::size_t skip = std::min(overlap, starts.size() - 1);
    out.append(t, starts[skip], std::string::npos);
  }
  return out;
}

}  // namespace ratt
