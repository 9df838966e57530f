#include "fuseforge/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fuseforge/errors.hpp"
#include "fuseforge/rng.hpp"

namespace fuseforge {

namespace {

constexpr std::uint64_t kErmStream = 0x65726d;
constexpr std::uint64_t kSbmStream = 0x73626d;

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ParameterError(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
    }
}

// Calls emit(k) for every index k in [0, count) kept independently with
// probability p, skipping ahead geometrically instead of drawing per pair.
template <class Emit>
void geometric_sample(std::uint64_t count, double p, SplitMix64& rng, Emit emit) {
    if (p <= 0.0 || count == 0) return;
    if (p >= 1.0) {
        for (std::uint64_t k = 0; k < count; ++k) emit(k);
        return;
    }
    const double logq = std::log1p(-p);
    std::uint64_t k = 0;
    for (;;) {
        const double r = rng.uniform01();
        const double skip = std::floor(std::log1p(-r) / logq);
        if (skip >= static_cast<double>(count - k)) return;
        k += static_cast<std::uint64_t>(skip);
        emit(k);
        if (++k >= count) return;
    }
}

// Index k over the pairs (i, j), 0 <= j < i < n, ordered by i then j.
std::pair<AgentId, AgentId> lower_pair(std::uint64_t k) {
    auto i = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(k))) / 2.0);
    while (i * (i - 1) / 2 > k) --i;
    while ((i + 1) * i / 2 <= k) ++i;
    const std::uint64_t j = k - i * (i - 1) / 2;
    return {static_cast<AgentId>(j), static_cast<AgentId>(i)};
}

} // namespace

std::size_t Graph::edge_count() const {
    std::size_t total = 0;
    for (const auto& adj : adjacency) total += adj.size();
    return total / 2;
}

Graph graph_from_edges(std::size_t n, const std::vector<std::pair<AgentId, AgentId>>& edges) {
    Graph g;
    g.adjacency.resize(n);
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
            throw ParameterError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                 ") outside vertex range 0.." + std::to_string(n));
        }
        if (u == v) throw ParameterError("self-loop on vertex " + std::to_string(u));
        g.adjacency[static_cast<std::size_t>(u)].push_back(v);
        g.adjacency[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& adj : g.adjacency) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    return g;
}

Graph torus2d(std::int64_t width, std::int64_t height) {
    if (width < 3 || height < 3) {
        throw ParameterError("torus dimensions must be at least 3x3, got " + std::to_string(width) + "x" +
                             std::to_string(height));
    }
    Graph g;
    g.adjacency.resize(static_cast<std::size_t>(width * height));
    for (std::int64_t r = 0; r < height; ++r) {
        for (std::int64_t c = 0; c < width; ++c) {
            auto& adj = g.adjacency[static_cast<std::size_t>(r * width + c)];
            adj.reserve(8);
            for (std::int64_t dr = -1; dr <= 1; ++dr) {
                for (std::int64_t dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const std::int64_t rr = (r + dr + height) % height;
                    const std::int64_t cc = (c + dc + width) % width;
                    adj.push_back(rr * width + cc);
                }
            }
            std::sort(adj.begin(), adj.end());
        }
    }
    return g;
}

Graph erm(std::int64_t n, double p, std::uint64_t seed) {
    if (n < 0) throw ParameterError("vertex count must be non-negative");
    check_probability(p, "edge probability");
    SplitMix64 rng(derive_seed(seed, {kErmStream}));
    std::vector<std::pair<AgentId, AgentId>> edges;
    const auto un = static_cast<std::uint64_t>(n);
    geometric_sample(un * (un - (un > 0 ? 1 : 0)) / 2, p, rng,
                     [&](std::uint64_t k) { edges.push_back(lower_pair(k)); });
    return graph_from_edges(static_cast<std::size_t>(n), edges);
}

Graph sbm(std::int64_t n, std::int64_t blocks, double pIn, double pOut, std::uint64_t seed) {
    if (n < 0 || blocks < 1) throw ParameterError("sbm needs n >= 0 and at least one block");
    if (n % blocks != 0) {
        throw ParameterError("block count " + std::to_string(blocks) + " does not divide " + std::to_string(n));
    }
    check_probability(pIn, "in-block probability");
    check_probability(pOut, "cross-block probability");
    const auto s = static_cast<std::uint64_t>(n / blocks);
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (std::int64_t a = 0; a < blocks; ++a) {
        const AgentId base = a * static_cast<AgentId>(s);
        SplitMix64 in(derive_seed(seed, {kSbmStream, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(a)}));
        geometric_sample(s * (s - (s > 0 ? 1 : 0)) / 2, pIn, in, [&](std::uint64_t k) {
            auto [j, i] = lower_pair(k);
            edges.emplace_back(base + j, base + i);
        });
        for (std::int64_t b = a + 1; b < blocks; ++b) {
            const AgentId other = b * static_cast<AgentId>(s);
            SplitMix64 cross(
                derive_seed(seed, {kSbmStream, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)}));
            geometric_sample(s * s, pOut, cross, [&](std::uint64_t k) {
                edges.emplace_back(base + static_cast<AgentId>(k / s), other + static_cast<AgentId>(k % s));
            });
        }
    }
    return graph_from_edges(static_cast<std::size_t>(n), edges);
}

Graph star(std::int64_t n) {
    if (n < 2) throw ParameterError("star needs at least 2 vertices");
    Graph g;
    g.adjacency.resize(static_cast<std::size_t>(n));
    g.adjacency[0].reserve(static_cast<std::size_t>(n - 1));
    for (AgentId v = 1; v < n; ++v) {
        g.adjacency[0].push_back(v);
        g.adjacency[static_cast<std::size_t>(v)].push_back(0);
    }
    return g;
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << g.vertex_count() << ' ' << g.edge_count() << '\n';
    for (std::size_t u = 0; u < g.vertex_count(); ++u) {
        for (AgentId v : g.adjacency[u]) {
            if (static_cast<AgentId>(u) < v) out << u << ' ' << v << '\n';
        }
    }
    if (!out) throw IoError("write to " + path + " failed");
}

Graph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::size_t lineNo = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineNo;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };
    if (!next_line()) throw ParseError(path + ": missing \"n m\" header");
    long long n = -1, m = -1;
    {
        std::istringstream header(line);
        if (!(header >> n >> m) || n < 0 || m < 0) throw ParseError(path + ":1: malformed header");
    }
    std::vector<std::pair<AgentId, AgentId>> edges;
    edges.reserve(static_cast<std::size_t>(m));
    while (next_line()) {
        std::istringstream row(line);
        long long u = 0, v = 0;
        if (!(row >> u >> v)) throw ParseError(path + ":" + std::to_string(lineNo) + ": expected \"u v\"");
        edges.emplace_back(u, v);
    }
    if (edges.size() != static_cast<std::size_t>(m)) {
        throw ParseError(path + ": header declares " + std::to_string(m) + " edges, found " +
                         std::to_string(edges.size()));
    }
    return graph_from_edges(static_cast<std::size_t>(n), edges);
}

} // namespace fuseforge
