// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "artriage/ingest.hpp"
#include "artriage/model.hpp"

namespace artriage {

/// 100 * count / total, rounded half-up to two decimals.
double percentage(long count, long total);

/// Rounds half-up to two decimals.
double round2(double value);

struct SeverityStat {
    long count = 0;
    double pct = 0.0;
    bool operator==(const SeverityStat&) const = default;
};

struct CorpusSummary {
    long total_findings = 0;
    std::map<Tool, long> per_tool;
    std::map<Severity, SeverityStat> per_severity; // all tools
    std::map<Tool, std::map<Severity, SeverityStat>> per_tool_severity;
    std::vector<std::pair<std::string, long>> top_cwes; // (cwe, distinct artifact count)
    long distinct_flags = 0;
    long artifact_count = 0;

    bool operator==(const CorpusSummary&) const = default;
};

/// Sums per-tool count records; the same totaling used by compute_summary.
long total_from_tool_counts(const std::map<Tool, long>& per_tool);

CorpusSummary compute_summary(const FindingSet& set, std::size_t top_k = 10);

/// Flags ranked by distinct-artifact count descending (ties by FlagKey
/// lexicographic), at least `min_artifacts` artifacts each, at most k.
std::vector<FlagKey> select_prevalent_flags(const FindingSet& set, int k, int min_artifacts);

struct SamplePlan {
    std::vector<FlagKey> selected_flags;
    std::map<FlagKey, std::vector<FindingRef>> per_flag_samples;
    std::uint64_t seed = 0;
    int k = 0;
    int min_artifacts = 0;
    int n_per_flag = 0;
};

/// Seeded uniform sampling without replacement, n_per_flag per flag;
/// undersized groups contribute all instances. The RNG is mt19937 with a
/// portable rejection-sampled uniform, so plans reproduce bit-exactly.
SamplePlan sample_findings(const FindingSet& set, const std::vector<FlagKey>& flags,
                           int n_per_flag, std::uint64_t seed);

ojson summary_to_json(const CorpusSummary& s);
CorpusSummary summary_from_json(const json& j);
std::string summary_to_text(const CorpusSummary& s);
ojson plan_to_json(const SamplePlan& p);

} // namespace artriage
