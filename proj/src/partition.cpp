#include "fuseforge/partition.hpp"

#include <algorithm>
#include <deque>

#include "fuseforge/errors.hpp"
#include "fuseforge/rng.hpp"

namespace fuseforge {

namespace {

constexpr std::uint64_t kRandomPartitionStream = 0x72616e64;
constexpr std::uint64_t kGreedyPartitionStream = 0x67726479;

void check_target(std::int64_t targetSize) {
    if (targetSize < 1) throw ParameterError("target partition size must be at least 1");
}

// Fenwick tree over 0/1 flags with k-th set element lookup.
class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {
        for (std::size_t i = 1; i <= n; ++i) {
            tree_[i] += 1;
            const std::size_t parent = i + (i & (~i + 1));
            if (parent <= n) tree_[parent] += tree_[i];
        }
        for (top_ = 1; top_ * 2 <= n; top_ *= 2) {}
    }

    void remove(std::size_t i) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) --tree_[i];
    }

    // Index of the (k+1)-th remaining element.
    std::size_t kth(std::size_t k) const {
        std::size_t pos = 0;
        for (std::size_t step = top_; step > 0; step /= 2) {
            if (pos + step < tree_.size() && tree_[pos + step] <= k) {
                pos += step;
                k -= tree_[pos];
            }
        }
        return pos;
    }

private:
    std::vector<std::size_t> tree_;
    std::size_t top_ = 1;
};

} // namespace

std::vector<Partition> build_partitions(const Graph& g, const Assignment& a) {
    const std::size_t n = g.vertex_count();
    if (a.size() != n) throw CoverageError("assignment covers " + std::to_string(a.size()) + " of " +
                                           std::to_string(n) + " vertices");
    PartitionId k = 0;
    for (PartitionId p : a) {
        if (p < 0) throw CoverageError("negative partition id");
        k = std::max(k, static_cast<PartitionId>(p + 1));
    }
    std::vector<Partition> parts(static_cast<std::size_t>(k));
    for (PartitionId p = 0; p < k; ++p) parts[static_cast<std::size_t>(p)].id = p;
    for (std::size_t u = 0; u < n; ++u) {
        auto& part = parts[static_cast<std::size_t>(a[u])];
        const auto src = static_cast<AgentId>(u);
        part.members.push_back(src);
        for (AgentId v : g.adjacency[u]) {
            const PartitionId pv = a[static_cast<std::size_t>(v)];
            if (pv == a[u]) {
                part.localEdges.emplace_back(src, v);
            } else {
                part.crossEdges.push_back({src, v, pv});
            }
        }
    }
    for (const auto& part : parts) {
        if (part.members.empty()) throw CoverageError("partition " + std::to_string(part.id) + " is empty");
    }
    return parts;
}

Assignment assignment_of(const std::vector<Partition>& parts, std::size_t n) {
    Assignment a(n, -1);
    for (const auto& part : parts) {
        for (AgentId v : part.members) {
            if (v < 0 || static_cast<std::size_t>(v) >= n) {
                throw CoverageError("member " + std::to_string(v) + " outside the graph");
            }
            if (a[static_cast<std::size_t>(v)] != -1) {
                throw CoverageError("vertex " + std::to_string(v) + " assigned to partitions " +
                                    std::to_string(a[static_cast<std::size_t>(v)]) + " and " +
                                    std::to_string(part.id));
            }
            a[static_cast<std::size_t>(v)] = part.id;
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (a[v] == -1) throw CoverageError("vertex " + std::to_string(v) + " not assigned");
    }
    return a;
}

std::vector<Partition> partition_random(const Graph& g, std::int64_t targetSize, std::uint64_t seed) {
    check_target(targetSize);
    const std::size_t n = g.vertex_count();
    std::vector<AgentId> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<AgentId>(i);
    SplitMix64 rng(derive_seed(seed, {kRandomPartitionStream}));
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    Assignment a(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(order[i])] = static_cast<PartitionId>(i / static_cast<std::size_t>(targetSize));
    }
    return build_partitions(g, a);
}

std::vector<Partition> partition_hash(const Graph& g, std::int64_t targetSize, HashMode mode) {
    check_target(targetSize);
    const auto n = static_cast<std::int64_t>(g.vertex_count());
    const std::int64_t k = (n + targetSize - 1) / targetSize;
    Assignment a(static_cast<std::size_t>(n));
    for (std::int64_t v = 0; v < n; ++v) {
        a[static_cast<std::size_t>(v)] = static_cast<PartitionId>(mode == HashMode::Div ? v / targetSize : v % k);
    }
    return build_partitions(g, a);
}

Assignment greedy_assignment(const Graph& g, std::int64_t targetSize,
                             const std::function<std::size_t(std::size_t)>& pick) {
    check_target(targetSize);
    const std::size_t n = g.vertex_count();
    const auto target = static_cast<std::size_t>(targetSize);
    Assignment a(n, -1);
    Fenwick unplaced(n);
    std::size_t remaining = n;
    auto place = [&](AgentId v, PartitionId p) {
        a[static_cast<std::size_t>(v)] = p;
        unplaced.remove(static_cast<std::size_t>(v));
        --remaining;
    };
    std::deque<AgentId> queue;
    for (PartitionId p = 0; remaining > 0; ++p) {
        std::size_t size = 0;
        queue.clear();
        while (size < target && remaining > 0) {
            if (queue.empty()) {
                const std::size_t idx = pick(remaining);
                if (idx >= remaining) throw ParameterError("greedy start index out of range");
                const auto start = static_cast<AgentId>(unplaced.kth(idx));
                place(start, p);
                ++size;
                queue.push_back(start);
                continue;
            }
            const AgentId u = queue.front();
            queue.pop_front();
            for (AgentId v : g.neighbors(u)) {
                if (size >= target) break;
                if (a[static_cast<std::size_t>(v)] != -1) continue;
                place(v, p);
                ++size;
                queue.push_back(v);
            }
        }
    }
    return a;
}

std::vector<Partition> partition_greedy(const Graph& g, std::int64_t targetSize, std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, {kGreedyPartitionStream}));
    return build_partitions(g, greedy_assignment(g, targetSize, [&](std::size_t count) { return rng.below(count); }));
}

std::size_t cross_edge_count(const std::vector<Partition>& parts) {
    std::size_t total = 0;
    for (const auto& part : parts) total += part.crossEdges.size();
    return total;
}

void check_partitions(const Graph& g, const std::vector<Partition>& parts) {
    const Assignment a = assignment_of(parts, g.vertex_count());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].id != static_cast<PartitionId>(i)) throw CoverageError("partition ids are not 0..k-1");
        if (!std::is_sorted(parts[i].members.begin(), parts[i].members.end())) {
            throw CoverageError("members of partition " + std::to_string(i) + " are not sorted");
        }
    }
    const auto rebuilt = build_partitions(g, a);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (rebuilt[i].crossEdges != parts[i].crossEdges || rebuilt[i].localEdges != parts[i].localEdges) {
            throw CoverageError("edge lists of partition " + std::to_string(i) + " disagree with the assignment");
        }
    }
}

} // namespace fuseforge
