#include "ratt/retrieval/index_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "ratt/core/error.hpp"

namespace ratt {

namespace {

template <typename U>
void put_le(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes, sizeof(U));
}

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::invalid_input, "string too long for index format");
  }
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(ErrorKind::index_corruption, std::string("truncated index while reading ") + what);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

std::string get_string(std::istream& in, const char* what) {
  const auto len = get_le<std::uint32_t>(in, what);
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) {
    throw Error(ErrorKind::index_corruption, std::string("truncated index while reading ") + what);
  }
  return s;
}

}  // namespace

void write_index(std::ostream& out, const Library& library) {
  out.write(kIndexMagic, sizeof(kIndexMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(library.dimension()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(library.size()));
  put_string(out, library.embedder_id());
  for (std::size_t i = 0; i < library.size(); ++i) {
    put_string(out, library.doc_id(i));
    put_le<std::uint32_t>(out, library.chunk_index(i));
    put_string(out, library.text(i));
    const auto v = library.vector(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v(j)));
    }
  }
  if (!out) throw Error(ErrorKind::io, "failed writing index");
}

Library read_index(std::istream& in) {
  char magic[sizeof(kIndexMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) {
    throw Error(ErrorKind::index_corruption, "bad index magic");
  }
  const auto dimension = get_le<std::uint32_t>(in, "dimension");
  const auto count = get_le<std::uint64_t>(in, "chunk count");
  std::string embedder_id = get_string(in, "embedder id");

  std::vector<DocumentChunk> chunks;
  for (std::uint64_t c = 0; c < count; ++c) {
    DocumentChunk chunk;
    chunk.doc_id = get_string(in, "doc id");
    chunk.chunk_index = get_le<std::uint32_t>(in, "chunk index");
    chunk.text = get_string(in, "chunk text");
    chunk.vector.resize(dimension);
    for (std::uint32_t j = 0; j < dimension; ++j) {
      chunk.vector(j) = std::bit_cast<float>(get_le<std::uint32_t>(in, "vector"));
    }
    chunks.push_back(std::move(chunk));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::index_corruption, "trailing bytes after last chunk");
  }
  return Library(std::move(embedder_id), dimension, std::move(chunks));
}

void save_index(const Library& library, const std::string& path) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp + " for writing");
    try {
      write_index(out, library);
    } catch (...) {
      out.close();
      std::remove(tmp.c_str());
      throw;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error(ErrorKind::io, "cannot move index into place at " + path + ": " + ec.message());
  }
}

Library load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open index " + path);
  return read_index(in);
}

}  // namespace ratt
