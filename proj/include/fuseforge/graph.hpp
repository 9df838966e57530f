#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fuseforge/equations.hpp"

namespace fuseforge {

// Undirected graph stored as sorted per-vertex neighbour lists (each edge
// appears in both endpoints' lists). Vertex ids are 0..n-1.
struct Graph {
    std::vector<std::vector<AgentId>> adjacency;

    std::size_t vertex_count() const { return adjacency.size(); }
    std::size_t edge_count() const;  // undirected edges
    const std::vector<AgentId>& neighbors(AgentId v) const { return adjacency.at(static_cast<std::size_t>(v)); }

    bool operator==(const Graph&) const = default;
};

// Builds a graph from undirected edges; rejects self-loops and ids out of
// range, drops duplicate edges.
Graph graph_from_edges(std::size_t n, const std::vector<std::pair<AgentId, AgentId>>& edges);

// Moore neighbourhood on a width x height torus; vertex (row, col) has id
// row * width + col.
Graph torus2d(std::int64_t width, std::int64_t height);

// Erdos-Renyi G(n, p).
Graph erm(std::int64_t n, double p, std::uint64_t seed);

// Stochastic block model with equal blocks of n / blocks consecutive ids.
Graph sbm(std::int64_t n, std::int64_t blocks, double pIn, double pOut, std::uint64_t seed);

// Vertex 0 joined to every other vertex.
Graph star(std::int64_t n);

// Edge-list text: a header line "n m", then one "u v" line per edge, u < v,
// sorted ascending.
void save_edge_list(const Graph& g, const std::string& path);
Graph load_edge_list(const std::string& path);

} // namespace fuseforge
