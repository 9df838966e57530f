#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fuseforge/optimizer.hpp"
#include "fuseforge/workloads.hpp"

namespace fuseforge::bench {

struct RunConfig {
    workloads::WorkloadConfig workload;
    std::int64_t partitions = 10;
    std::string partitioner = "greedy";  // random | hash-div | hash-mod | greedy
    std::string mode = "full";
    std::optional<std::int64_t> rounds;  // workload default when absent
    int threads = 1;
    int repetitions = 3;
    std::string saveGraph;
    std::string loadGraph;

    std::int64_t resolved_rounds() const;
};

// Applies one `key = value` setting; keys match the CLI flag names without
// dashes. Throws UsageError for unknown keys or malformed values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
// Every key apply_setting accepts.
const std::vector<std::string>& setting_keys();
// Reads a key=value file; `#` starts a comment.
void load_config_file(RunConfig& cfg, const std::string& path);
// Throws UsageError naming the offending field.
void validate(const RunConfig& cfg);

std::vector<Partition> make_partitions(const Graph& g, const RunConfig& cfg);

struct MetricsRow {
    RunConfig config;
    std::int64_t agents = 0;
    std::int64_t partitions = 0;  // as produced by the partitioner
    std::int64_t rounds = 0;
    std::optional<double> meanTimePerRoundMs;
    std::int64_t totalRounds = 0;
    // Totals over one execution of `rounds` supersteps.
    std::uint64_t logicalMessages = 0;
    std::uint64_t wireMessages = 0;
    std::uint64_t wireBytes = 0;
    std::uint64_t targetInbound = 0;
    PassTimes passMs{};
    double optimizerTimeMs = 0;
    double graphBuildTimeMs = 0;
    std::uint64_t checksum = 0;
};

// Graph build, partitioning, optimization, then `repetitions` timed
// executions. The mean time per round is the mean over repetitions.
MetricsRow run(const RunConfig& cfg);

const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const MetricsRow& row);
// Appends rows in one write, adding the header to a new or empty file.
void append_csv(const std::string& path, const std::vector<MetricsRow>& rows);

// One run per value of `axis` (agents, threads, partitions or mode).
std::vector<MetricsRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<std::string>& values);

} // namespace fuseforge::bench
