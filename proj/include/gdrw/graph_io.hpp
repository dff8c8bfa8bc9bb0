#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/crc.hpp>

#include "gdrw/graph.hpp"

namespace gdrw {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary CSR layout, all integers little endian:
//   "GDRW" | version u32 | |V| u64 | |E| u64 | flags u32
//   row_index u64 x (|V|+1) | col_index u32 x |E|
//   [weights u64 x |E|] [labels u16 x |V|] [relations u16 x |E|]   (flag order)
//   CRC32 u32 over every preceding byte
inline constexpr std::array<char, 4> kCsrMagic{'G', 'D', 'R', 'W'};
inline constexpr std::uint32_t kCsrVersion = 1;
inline constexpr std::uint32_t kFlagWeights = 1u << 0;
inline constexpr std::uint32_t kFlagLabels = 1u << 1;
inline constexpr std::uint32_t kFlagRelations = 1u << 2;

namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  void put_raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<unsigned char>& bytes() const noexcept { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& b, std::size_t end) : b_(b), end_(end) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{b_[pos_ + i]} << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  template <typename T>
  std::vector<T> get_array(std::uint64_t count) {
    if (count > (end_ - pos_) / sizeof(T)) throw FormatError("truncated CSR payload");
    std::vector<T> out(count);
    for (auto& x : out) x = get<T>();
    return out;
  }

  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw FormatError("truncated CSR payload");
  }
  std::size_t pos() const noexcept { return pos_; }

 private:
  const std::vector<unsigned char>& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32(const unsigned char* p, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(p, n);
  return crc.checksum();
}

}  // namespace detail

inline void write_binary(const CsrGraph& g, std::ostream& out) {
  detail::ByteWriter w;
  w.put_raw(kCsrMagic.data(), kCsrMagic.size());
  w.put<std::uint32_t>(kCsrVersion);
  w.put<std::uint64_t>(g.num_vertices());
  w.put<std::uint64_t>(g.num_edges());
  std::uint32_t flags = kFlagWeights | kFlagLabels;
  if (g.has_explicit_relations()) flags |= kFlagRelations;
  w.put<std::uint32_t>(flags);
  for (auto x : g.row_index()) w.put<std::uint64_t>(x);
  for (auto x : g.col_index()) w.put<std::uint32_t>(x);
  for (auto x : g.edge_weights()) w.put<std::uint64_t>(x);
  for (auto x : g.vertex_labels()) w.put<std::uint16_t>(x);
  for (auto x : g.explicit_relations()) w.put<std::uint16_t>(x);
  const auto& bytes = w.bytes();
  const std::uint32_t crc = detail::crc32(bytes.data(), bytes.size());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>(crc >> (8 * i)));
  if (!out) throw std::runtime_error("failed writing CSR file");
}

inline CsrGraph read_binary(std::istream& in) {
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() < 4 || !std::equal(kCsrMagic.begin(), kCsrMagic.end(), bytes.begin(),
                                      [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw FormatError("bad magic: not a GDRW CSR file");
  }
  if (bytes.size() < 4 + 4 + 8 + 8 + 4 + 4) throw FormatError("truncated CSR header");
  const std::size_t payload_end = bytes.size() - 4;

  detail::ByteReader r(bytes, payload_end);
  for (int i = 0; i < 4; ++i) r.get<std::uint8_t>();
  const auto version = r.get<std::uint32_t>();
  if (version != kCsrVersion) throw FormatError("unsupported CSR version " + std::to_string(version));
  const auto nv = r.get<std::uint64_t>();
  const auto ne = r.get<std::uint64_t>();
  const auto flags = r.get<std::uint32_t>();
  if (flags & ~(kFlagWeights | kFlagLabels | kFlagRelations)) throw FormatError("unknown flag bits");
  if (nv > kMaxVertexId + 1) throw FormatError("vertex count exceeds 32-bit ids");

  auto row = r.get_array<std::uint64_t>(nv + 1);
  auto col = r.get_array<std::uint32_t>(ne);
  std::vector<std::uint64_t> wt = (flags & kFlagWeights) ? r.get_array<std::uint64_t>(ne)
                                                          : std::vector<std::uint64_t>(ne, FixedWeight::kOne);
  std::vector<Label> lab = (flags & kFlagLabels) ? r.get_array<std::uint16_t>(nv) : std::vector<Label>(nv, 0);
  std::vector<RelationId> rel;
  if (flags & kFlagRelations) rel = r.get_array<std::uint16_t>(ne);
  if (r.pos() != payload_end) throw FormatError("trailing bytes after CSR payload");

  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= std::uint32_t{bytes[payload_end + i]} << (8 * i);
  if (stored != detail::crc32(bytes.data(), payload_end)) throw FormatError("CRC32 mismatch");

  try {
    return CsrGraph(std::move(row), std::move(col), std::move(wt), std::move(lab), std::move(rel));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed CSR structure: ") + e.what());
  }
}

inline void write_binary_file(const CsrGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_binary(g, out);
}

inline CsrGraph read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_binary(in);
}

/// Loads either format: binary if the file starts with the magic, otherwise
/// a text edge list.
inline CsrGraph load_graph_file(const std::string& path, bool directed = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 4 && head == kCsrMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in) : load_edge_list(in, directed);
}

}  // namespace gdrw
