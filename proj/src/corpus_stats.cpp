// SPDX-License-Identifier: Apache-2.0
#include "artriage/corpus_stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace artriage {

double round2(double value) { return std::floor(value * 100.0 + 0.5) / 100.0; }

double percentage(long count, long total) {
    if (total == 0) return 0.0;
    return round2(100.0 * static_cast<double>(count) / static_cast<double>(total));
}

long total_from_tool_counts(const std::map<Tool, long>& per_tool) {
    long total = 0;
    for (const auto& [_, count] : per_tool) total += count;
    return total;
}

namespace {

std::map<Severity, SeverityStat> severity_distribution(const std::map<Severity, long>& counts) {
    long total = 0;
    for (const auto& [_, c] : counts) total += c;
    std::map<Severity, SeverityStat> out;
    for (const auto& [sev, c] : counts) out[sev] = {c, percentage(c, total)};
    return out;
}

long cwe_number(const std::string& cwe) {
    auto dash = cwe.find('-');
    if (dash == std::string::npos) return 0;
    try {
        return std::stol(cwe.substr(dash + 1));
    } catch (const std::exception&) {
        return 0;
    }
}

} // namespace

CorpusSummary compute_summary(const FindingSet& set, std::size_t top_k) {
    CorpusSummary s;
    std::map<Severity, long> severity_counts;
    std::map<Tool, std::map<Severity, long>> tool_severity_counts;
    std::map<std::string, std::set<std::string>> cwe_artifacts;

    for (const auto& f : set.findings) {
        s.per_tool[f.tool] += 1;
        severity_counts[f.severity] += 1;
        tool_severity_counts[f.tool][f.severity] += 1;
        for (const auto& cwe : f.cwe_ids) cwe_artifacts[cwe].insert(f.artifact_id);
    }
    s.total_findings = total_from_tool_counts(s.per_tool);
    s.per_severity = severity_distribution(severity_counts);
    for (const auto& [tool, counts] : tool_severity_counts) {
        s.per_tool_severity[tool] = severity_distribution(counts);
    }
    s.distinct_flags = static_cast<long>(set.by_flag.size());
    s.artifact_count = static_cast<long>(set.by_artifact.size());

    std::vector<std::pair<std::string, long>> ranked;
    ranked.reserve(cwe_artifacts.size());
    for (const auto& [cwe, artifacts] : cwe_artifacts) {
        ranked.emplace_back(cwe, static_cast<long>(artifacts.size()));
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return cwe_number(a.first) < cwe_number(b.first);
    });
    if (ranked.size() > top_k) ranked.resize(top_k);
    s.top_cwes = std::move(ranked);
    return s;
}

std::vector<FlagKey> select_prevalent_flags(const FindingSet& set, int k, int min_artifacts) {
    if (k <= 0) return {};
    struct Ranked {
        FlagKey key;
        long artifacts;
    };
    std::vector<Ranked> ranked;
    for (const auto& [key, indices] : set.by_flag) {
        std::set<std::string> artifacts;
        for (auto i : indices) artifacts.insert(set.findings[i].artifact_id);
        if (static_cast<int>(artifacts.size()) >= min_artifacts) {
            ranked.push_back({key, static_cast<long>(artifacts.size())});
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.artifacts != b.artifacts) return a.artifacts > b.artifacts;
        auto at = to_string(a.key.tool), bt = to_string(b.key.tool);
        if (at != bt) return at < bt;
        return a.key.finding_id < b.key.finding_id;
    });
    if (static_cast<int>(ranked.size()) > k) ranked.resize(static_cast<size_t>(k));
    std::vector<FlagKey> out;
    out.reserve(ranked.size());
    for (auto& r : ranked) out.push_back(std::move(r.key));
    return out;
}

namespace {

// Unbiased uniform draw in [0, n) from the standardized mt19937 stream.
std::uint32_t uniform_below(std::mt19937& rng, std::uint32_t n) {
    const std::uint64_t span = 0x1'0000'0000ULL;
    const std::uint32_t limit = static_cast<std::uint32_t>(span - span % n);
    std::uint32_t x;
    do {
        x = rng();
    } while (limit != 0 && x >= limit);
    return x % n;
}

} // namespace

SamplePlan sample_findings(const FindingSet& set, const std::vector<FlagKey>& flags,
                           int n_per_flag, std::uint64_t seed) {
    SamplePlan plan;
    plan.selected_flags = flags;
    plan.seed = seed;
    plan.n_per_flag = n_per_flag;
    if (n_per_flag <= 0) return plan;

    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    for (const auto& flag : flags) {
        auto it = set.by_flag.find(flag);
        if (it == set.by_flag.end()) {
            plan.per_flag_samples[flag] = {};
            continue;
        }
        std::vector<FindingRef> group;
        group.reserve(it->second.size());
        for (auto i : it->second) group.push_back(make_ref(set.findings[i]));
        // Input-order independence: sample from a canonically sorted group.
        std::sort(group.begin(), group.end());

        if (static_cast<int>(group.size()) <= n_per_flag) {
            plan.per_flag_samples[flag] = std::move(group);
            continue;
        }
        // Partial Fisher-Yates for the first n elements.
        for (int i = 0; i < n_per_flag; ++i) {
            auto remaining = static_cast<std::uint32_t>(group.size() - static_cast<size_t>(i));
            auto j = static_cast<size_t>(i) + uniform_below(rng, remaining);
            std::swap(group[static_cast<size_t>(i)], group[j]);
        }
        group.resize(static_cast<size_t>(n_per_flag));
        std::sort(group.begin(), group.end());
        plan.per_flag_samples[flag] = std::move(group);
    }
    return plan;
}

ojson summary_to_json(const CorpusSummary& s) {
    ojson j;
    j["total_findings"] = s.total_findings;
    ojson per_tool;
    for (const auto& [tool, count] : s.per_tool) per_tool[to_string(tool)] = count;
    j["per_tool"] = per_tool;
    auto severity_block = [](const std::map<Severity, SeverityStat>& dist) {
        ojson block;
        for (const auto& [sev, stat] : dist) {
            block[to_string(sev)] = {{"count", stat.count}, {"pct", stat.pct}};
        }
        return block;
    };
    j["per_severity"] = severity_block(s.per_severity);
    ojson per_tool_sev;
    for (const auto& [tool, dist] : s.per_tool_severity) {
        per_tool_sev[to_string(tool)] = severity_block(dist);
    }
    j["per_tool_severity"] = per_tool_sev;
    ojson cwes = ojson::array();
    for (const auto& [cwe, count] : s.top_cwes) {
        cwes.push_back({{"cwe", cwe}, {"artifact_count", count}});
    }
    j["top_cwes"] = cwes;
    j["distinct_flags"] = s.distinct_flags;
    j["artifact_count"] = s.artifact_count;
    return j;
}

CorpusSummary summary_from_json(const json& j) {
    CorpusSummary s;
    s.total_findings = j.at("total_findings").get<long>();
    for (const auto& [name, count] : j.at("per_tool").items()) {
        auto tool = parse_tool(name);
        if (!tool) throw ParseError("unknown tool '" + name + "' in summary");
        s.per_tool[*tool] = count.get<long>();
    }
    auto severity_block = [](const json& block) {
        std::map<Severity, SeverityStat> out;
        for (const auto& [name, stat] : block.items()) {
            auto sev = parse_severity(name);
            if (!sev) throw ParseError("unknown severity '" + name + "' in summary");
            out[*sev] = {stat.at("count").get<long>(), stat.at("pct").get<double>()};
        }
        return out;
    };
    s.per_severity = severity_block(j.at("per_severity"));
    for (const auto& [name, block] : j.at("per_tool_severity").items()) {
        auto tool = parse_tool(name);
        if (!tool) throw ParseError("unknown tool '" + name + "' in summary");
        s.per_tool_severity[*tool] = severity_block(block);
    }
    for (const auto& entry : j.at("top_cwes")) {
        s.top_cwes.emplace_back(entry.at("cwe").get<std::string>(),
                                entry.at("artifact_count").get<long>());
    }
    s.distinct_flags = j.at("distinct_flags").get<long>();
    s.artifact_count = j.at("artifact_count").get<long>();
    return s;
}

namespace {

std::string pct_text(double pct) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << pct << "%";
    return out.str();
}

} // namespace

std::string summary_to_text(const CorpusSummary& s) {
    std::ostringstream out;
    out << "Findings by tool\n";
    for (const auto& [tool, count] : s.per_tool) {
        out << "  " << to_string(tool) << "  " << count << "\n";
    }
    out << "  total  " << s.total_findings << "\n";
    out << "Distinct flags: " << s.distinct_flags << "\n";
    out << "Artifacts: " << s.artifact_count << "\n";
    for (const auto& [tool, dist] : s.per_tool_severity) {
        out << "Severity distribution (" << to_string(tool) << ")\n";
        for (const auto& [sev, stat] : dist) {
            out << "  " << to_string(sev) << "  " << stat.count << " (" << pct_text(stat.pct)
                << ")\n";
        }
    }
    if (!s.top_cwes.empty()) {
        out << "Top CWEs by artifact count\n";
        for (const auto& [cwe, count] : s.top_cwes) {
            out << "  " << cwe << "  " << count << "\n";
        }
    }
    return out.str();
}

ojson plan_to_json(const SamplePlan& p) {
    ojson j;
    j["seed"] = p.seed;
    j["k"] = p.k;
    j["min_artifacts"] = p.min_artifacts;
    j["n_per_flag"] = p.n_per_flag;
    ojson flags = ojson::array();
    for (const auto& f : p.selected_flags) flags.push_back(f.render());
    j["selected_flags"] = flags;
    ojson samples;
    for (const auto& [flag, refs] : p.per_flag_samples) {
        ojson arr = ojson::array();
        for (const auto& r : refs) arr.push_back(ref_to_json(r));
        samples[flag.render()] = arr;
    }
    j["per_flag_samples"] = samples;
    return j;
}

} // namespace artriage
