#pragma once

#include <iosfwd>
#include <string>

#include "ratt/retrieval/library.hpp"

namespace ratt {

// Binary index layout, all integers little-endian:
//   "RATTIDX1"
//   u32 dimension K
//   u64 chunk count
//   u32 length + bytes   embedder_id
//   per chunk: u32 length + bytes doc_id, u32 chunk_index,
//              u32 length + bytes text, K x f32 vector
inline constexpr char kIndexMagic[8] = {'R', 'A', 'T', 'T', 'I', 'D', 'X', '1'};

void write_index(std::ostream& out, const Library& library);
Library read_index(std::istream& in);

/// Writes to a sibling temporary file and renames it into place, so a failed
/// save never leaves a partial index behind.
void save_index(const Library& library, const std::string& path);
Library load_index(const std::string& path);

}  // namespace ratt
