#pragma once

#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdrw/graph.hpp"
#include "gdrw/walkers.hpp"

namespace gdrw {

enum class ResultFormat { Text, Binary, Json };

inline ResultFormat parse_result_format(const std::string& s) {
  if (s == "text") return ResultFormat::Text;
  if (s == "binary") return ResultFormat::Binary;
  if (s == "json") return ResultFormat::Json;
  throw std::invalid_argument("unknown result format '" + s + "'");
}

inline const char* to_string(Termination t) { return t == Termination::Completed ? "completed" : "dead_end"; }

/// Text: one `query_id: v0 v1 ...` line per result.
/// Binary: per result u64 id, u32 path length, u32 vertices, little endian.
/// Json: array of {"id", "path", "terminated"}.
inline void write_results(std::ostream& out, std::span<const WalkResult> results, ResultFormat fmt) {
  switch (fmt) {
    case ResultFormat::Text:
      for (const auto& r : results) {
        out << r.query_id << ':';
        for (auto v : r.path) out << ' ' << v;
        out << '\n';
      }
      break;
    case ResultFormat::Binary: {
      auto put = [&](std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out.put(static_cast<char>(v >> (8 * i)));
      };
      for (const auto& r : results) {
        put(r.query_id, 8);
        put(r.path.size(), 4);
        for (auto v : r.path) put(v, 4);
      }
      break;
    }
    case ResultFormat::Json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : results) {
        arr.push_back({{"id", r.query_id}, {"path", r.path}, {"terminated", to_string(r.terminated)}});
      }
      out << arr.dump() << '\n';
      break;
    }
  }
  if (!out) throw std::runtime_error("failed writing walk results");
}

namespace detail {

inline Termination infer_termination(std::size_t path_len, std::optional<std::uint32_t> target_length) {
  if (!target_length) return Termination::Completed;
  return path_len >= static_cast<std::size_t>(*target_length) + 1 ? Termination::Completed
                                                                   : Termination::DeadEnd;
}

}  // namespace detail

/// Reads results back. Text and binary files do not record termination, so it
/// is inferred from `target_length` (a path shorter than target_length + 1
/// vertices ended in a dead end); without it every path counts as completed.
inline std::vector<WalkResult> read_results(std::istream& in, ResultFormat fmt,
                                            std::optional<std::uint32_t> target_length = std::nullopt) {
  std::vector<WalkResult> out;
  switch (fmt) {
    case ResultFormat::Text: {
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError(line_no, "missing ':' in walk result");
        WalkResult r;
        r.query_id = detail::parse_uint<std::uint64_t>(detail::trim(std::string_view(line).substr(0, colon)),
                                                       line_no, "query id", UINT64_MAX);
        for (auto tok : detail::split_ws(std::string_view(line).substr(colon + 1))) {
          r.path.push_back(detail::parse_uint<VertexId>(tok, line_no, "vertex id", kMaxVertexId));
        }
        if (r.path.empty()) throw ParseError(line_no, "empty path");
        r.terminated = detail::infer_termination(r.path.size(), target_length);
        out.push_back(std::move(r));
      }
      break;
    }
    case ResultFormat::Binary: {
      std::vector<unsigned char> b{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
      std::size_t pos = 0;
      auto get = [&](int bytes) {
        if (b.size() - pos < static_cast<std::size_t>(bytes)) throw std::runtime_error("truncated walk results");
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= std::uint64_t{b[pos + i]} << (8 * i);
        pos += bytes;
        return v;
      };
      while (pos < b.size()) {
        WalkResult r;
        r.query_id = get(8);
        const auto len = get(4);
        if (len > (b.size() - pos) / 4) throw std::runtime_error("truncated walk results");
        r.path.resize(len);
        for (auto& v : r.path) v = static_cast<VertexId>(get(4));
        r.terminated = detail::infer_termination(r.path.size(), target_length);
        out.push_back(std::move(r));
      }
      break;
    }
    case ResultFormat::Json: {
      const auto arr = nlohmann::json::parse(in);
      for (const auto& j : arr) {
        WalkResult r;
        r.query_id = j.at("id").get<std::uint64_t>();
        r.path = j.at("path").get<std::vector<VertexId>>();
        r.terminated = j.at("terminated").get<std::string>() == "dead_end" ? Termination::DeadEnd
                                                                            : Termination::Completed;
        out.push_back(std::move(r));
      }
      break;
    }
  }
  return out;
}

}  // namespace gdrw
