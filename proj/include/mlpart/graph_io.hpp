#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlpart/graph.hpp"

namespace mlpart {

/// Malformed graph or partition file. `line()` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

inline long long parse_integer(std::string_view token, std::size_t line_no) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line_no, "expected integer, got '" + std::string(token) + "'");
  }
  return value;
}

inline double parse_real(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseError(line_no, "expected number, got '" + std::string(token) + "'");
  }
  return value;
}

/// Shortest decimal representation that round-trips.
inline std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Reads a graph in Chaco/Metis adjacency format.
///
/// Header "n m [fmt]", fmt in {0, 1, 10, 11}: the ones digit enables edge
/// weights interleaved after each neighbor, the tens digit a leading node
/// weight. Lines starting with '%' are comments. Neighbor ids are 1-based.
/// A blank line is a node without neighbors.
inline Graph parse_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  auto next_content_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (!out.empty() && out[0] == '%') continue;
      return true;
    }
    return false;
  };

  std::vector<std::string_view> header;
  while (header.empty()) {
    if (!next_content_line(line)) throw ParseError(line_no, "missing header line");
    header = detail::split_tokens(line);
  }
  if (header.size() < 2 || header.size() > 4) {
    throw ParseError(line_no, "header must be 'n m [fmt [ncon]]'");
  }
  const long long n = detail::parse_integer(header[0], line_no);
  const long long m = detail::parse_integer(header[1], line_no);
  const long long fmt = header.size() >= 3 ? detail::parse_integer(header[2], line_no) : 0;
  if (n < 0 || m < 0) throw ParseError(line_no, "negative node or edge count");
  if (fmt != 0 && fmt != 1 && fmt != 10 && fmt != 11) {
    throw ParseError(line_no, "unsupported fmt " + std::to_string(fmt));
  }
  if (header.size() == 4 && detail::parse_integer(header[3], line_no) != 1) {
    throw ParseError(line_no, "multi-constraint graphs are not supported");
  }
  const bool has_edge_weights = fmt % 10 == 1;
  const bool has_node_weights = fmt / 10 == 1;
  const std::size_t header_line = line_no;

  std::vector<double> node_weights(static_cast<std::size_t>(n), 1.0);
  // Arcs as read, kept per node so symmetry can be checked afterwards.
  struct Arc {
    NodeId target;
    double weight;
  };
  std::vector<std::vector<Arc>> arcs(static_cast<std::size_t>(n));
  std::vector<std::size_t> node_line(static_cast<std::size_t>(n), 0);

  for (long long v = 0; v < n; ++v) {
    if (!next_content_line(line)) {
      throw ParseError(line_no, "expected " + std::to_string(n) + " node lines, found " +
                                    std::to_string(v));
    }
    node_line[v] = line_no;
    auto tokens = detail::split_tokens(line);
    std::size_t pos = 0;
    if (has_node_weights) {
      if (tokens.empty()) throw ParseError(line_no, "missing node weight");
      const double c = detail::parse_real(tokens[pos++], line_no);
      if (c < 0.0) throw ParseError(line_no, "negative node weight");
      node_weights[v] = c;
    }
    const std::size_t stride = has_edge_weights ? 2 : 1;
    if ((tokens.size() - pos) % stride != 0) {
      throw ParseError(line_no, "neighbor without edge weight");
    }
    for (; pos < tokens.size(); pos += stride) {
      const long long u = detail::parse_integer(tokens[pos], line_no);
      if (u < 1 || u > n) {
        throw ParseError(line_no, "neighbor index " + std::to_string(u) + " out of range");
      }
      if (u - 1 == v) throw ParseError(line_no, "self-loop");
      double w = 1.0;
      if (has_edge_weights) {
        w = detail::parse_real(tokens[pos + 1], line_no);
        if (!(w > 0.0)) throw ParseError(line_no, "non-positive edge weight");
      }
      arcs[v].push_back({static_cast<NodeId>(u - 1), w});
    }
  }
  while (next_content_line(line)) {
    if (!detail::split_tokens(line).empty()) {
      throw ParseError(line_no, "more node lines than the header declares");
    }
  }

  std::vector<WeightedEdge> edges;
  std::size_t arc_count = 0;
  for (NodeId v = 0; v < n; ++v) {
    auto& list = arcs[v];
    arc_count += list.size();
    std::sort(list.begin(), list.end(), [](const Arc& a, const Arc& b) { return a.target < b.target; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].target == list[i - 1].target) {
        throw ParseError(node_line[v], "duplicate neighbor " + std::to_string(list[i].target + 1));
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    for (const auto& arc : arcs[v]) {
      const auto& back = arcs[arc.target];
      auto it = std::lower_bound(back.begin(), back.end(), v,
                                 [](const Arc& a, NodeId id) { return a.target < id; });
      if (it == back.end() || it->target != v) {
        throw ParseError(node_line[v], "edge {" + std::to_string(v + 1) + "," +
                                           std::to_string(arc.target + 1) +
                                           "} missing from the adjacency of node " +
                                           std::to_string(arc.target + 1));
      }
      if (it->weight != arc.weight) {
        throw ParseError(node_line[v], "edge {" + std::to_string(v + 1) + "," +
                                           std::to_string(arc.target + 1) +
                                           "} has asymmetric weights");
      }
      if (v < arc.target) edges.push_back({v, arc.target, arc.weight});
    }
  }
  if (arc_count != 2 * static_cast<std::size_t>(m)) {
    throw ParseError(header_line, "header declares " + std::to_string(m) + " edges, body has " +
                                      std::to_string(arc_count / 2));
  }
  return Graph(std::move(node_weights), std::move(edges));
}

inline Graph parse_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_graph(in);
}

inline Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  return parse_graph(in);
}

/// Writes `g` in the format read by parse_graph. Weights are emitted only
/// when some weight differs from 1.
inline void write_graph(std::ostream& out, const Graph& g) {
  bool edge_weights = false;
  for (const auto& e : g.edges()) edge_weights |= e.weight != 1.0;
  bool node_weights = false;
  for (double c : g.node_weights()) node_weights |= c != 1.0;
  const int fmt = (node_weights ? 10 : 0) + (edge_weights ? 1 : 0);

  out << g.n() << ' ' << g.m();
  if (fmt != 0) out << ' ' << (fmt == 1 ? "1" : std::to_string(fmt));
  out << '\n';
  for (NodeId v = 0; v < g.n(); ++v) {
    bool first = true;
    auto sep = [&] {
      if (!first) out << ' ';
      first = false;
    };
    if (node_weights) {
      sep();
      out << detail::format_real(g.node_weight(v));
    }
    auto nb = g.neighbors(v);
    auto ids = g.incident_edges(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      sep();
      out << nb[i] + 1;
      if (edge_weights) out << ' ' << detail::format_real(g.edge_weight(ids[i]));
    }
    out << '\n';
  }
}

inline std::string serialize_graph(const Graph& g) {
  std::ostringstream out;
  write_graph(out, g);
  return out.str();
}

inline void write_graph_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file '" + path + "'");
  write_graph(out, g);
}

/// Partition file: one block id per line, in node order.
inline void write_partition(std::ostream& out, std::span<const BlockId> assignment) {
  for (BlockId b : assignment) out << b << '\n';
}

inline std::vector<BlockId> read_partition(std::istream& in, std::size_t n) {
  std::vector<BlockId> assignment;
  assignment.reserve(n);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = detail::split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 1) throw ParseError(line_no, "expected a single block id");
    const long long b = detail::parse_integer(tokens[0], line_no);
    if (b < 0) throw ParseError(line_no, "negative block id");
    assignment.push_back(static_cast<BlockId>(b));
  }
  if (assignment.size() != n) {
    throw ParseError(line_no, "expected " + std::to_string(n) + " block ids, found " +
                                  std::to_string(assignment.size()));
  }
  return assignment;
}

}  // namespace mlpart
