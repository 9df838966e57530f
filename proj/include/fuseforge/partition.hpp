#pragma once

#include <functional>
#include <vector>

#include "fuseforge/graph.hpp"

namespace fuseforge {

struct CrossEdge {
    AgentId source = 0;  // member of the owning partition
    AgentId target = 0;
    PartitionId targetPartition = 0;

    bool operator==(const CrossEdge&) const = default;
};

struct Partition {
    PartitionId id = 0;
    std::vector<AgentId> members;  // ascending
    std::vector<std::pair<AgentId, AgentId>> localEdges;  // directed, both ends members
    std::vector<CrossEdge> crossEdges;  // directed, source is a member

    bool operator==(const Partition&) const = default;
};

// Vertex -> partition id.
using Assignment = std::vector<PartitionId>;

// Partition ids must be 0..k-1 with every id used.
std::vector<Partition> build_partitions(const Graph& g, const Assignment& a);
Assignment assignment_of(const std::vector<Partition>& parts, std::size_t n);

enum class HashMode { Div, Mod };

std::vector<Partition> partition_random(const Graph& g, std::int64_t targetSize, std::uint64_t seed);
std::vector<Partition> partition_hash(const Graph& g, std::int64_t targetSize, HashMode mode);
std::vector<Partition> partition_greedy(const Graph& g, std::int64_t targetSize, std::uint64_t seed);

// Greedy breadth-first growth with the start vertex chosen by
// pick(unplacedCount), an index into the unplaced vertices in ascending id
// order.
Assignment greedy_assignment(const Graph& g, std::int64_t targetSize,
                             const std::function<std::size_t(std::size_t)>& pick);

// Directed cross-partition edges summed over all partitions.
std::size_t cross_edge_count(const std::vector<Partition>& parts);

// Throws CoverageError unless the partitions are a disjoint cover of the
// graph with consistent cross-edge lists.
void check_partitions(const Graph& g, const std::vector<Partition>& parts);

} // namespace fuseforge
