// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "artriage/corpus_stats.hpp"
#include "artriage/evaluation.hpp"
#include "artriage/ingest.hpp"
#include "artriage/reasoning.hpp"

namespace artriage {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::filesystem::path repo_path;
    std::string artifact_id;
    std::vector<std::filesystem::path> semgrep_reports;
    std::vector<std::filesystem::path> trivy_reports;
    std::optional<std::filesystem::path> builtin_rules_path;
    bool builtin_scan_enabled = true;
    BackendKind backend = BackendKind::heuristic;
    std::string endpoint_url; // remote backend only
    std::string model_name;   // remote backend only
    std::string api_key;      // from the environment, remote backend only
    Budget budget;
    PriceConfig prices;
    std::uint64_t seed = 0;
    int worker_count = 1;
    std::filesystem::path output_dir;
};

struct ChecklistItem {
    std::string question;
    std::string status; // yes | no | unclear
    std::string evidence;
    bool operator==(const ChecklistItem&) const = default;
};

struct FindingError {
    FindingRef ref;
    std::string message;
    bool operator==(const FindingError&) const = default;
};

struct LabelTally {
    long count = 0;
    double pct = 0.0;
    bool operator==(const LabelTally&) const = default;
};

struct ReportDocument {
    CorpusSummary summary;
    std::vector<std::pair<FindingRef, Assessment>> assessments;
    std::map<SecurityLabel, LabelTally> label_tally;
    std::vector<ChecklistItem> checklist;
    std::optional<CostRecord> cost;
    std::vector<FindingError> errors;

    bool operator==(const ReportDocument&) const = default;
};

enum class ReportFormat { json, markdown };

struct BatchAnalysis {
    std::vector<std::pair<FindingRef, Assessment>> assessments; // input order
    std::vector<AgentTrace> traces;                             // aligned with assessments
    std::vector<FindingError> errors;
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

/// Analyzes findings concurrently (one backend session per finding, up to
/// `workers` threads). Per-finding failures never abort the batch.
BatchAnalysis analyze_batch(const std::vector<Finding>& findings, const RepoHandle& repo,
                            const BackendFactory& make_backend, const Budget& budget,
                            int workers);

/// Scan -> normalize -> per-finding analysis -> report. Writes
/// findings.ndjson, assessments.ndjson, traces.ndjson, report.json and
/// report.md under config.output_dir. Per-finding backend failures are
/// recorded in the document without aborting the batch.
ReportDocument run_pipeline(const RunConfig& config);

/// The five release-review questions with mechanically derived statuses.
std::vector<ChecklistItem> render_checklist(
    const FindingSet& findings, const std::vector<std::pair<FindingRef, Assessment>>& assessments,
    const RepoHandle& repo);

std::string render_report(const ReportDocument& doc, ReportFormat format);

ojson report_to_json(const ReportDocument& doc);
ReportDocument report_from_json(const json& j);

ojson trace_to_json(const AgentTrace& trace);

// Assessment batches as exchanged between the analyze and report stages.
std::string write_assessments_ndjson(
    const std::vector<std::pair<FindingRef, Assessment>>& assessments);
std::vector<std::pair<FindingRef, Assessment>> read_assessments_ndjson(const std::string& text);

} // namespace artriage
