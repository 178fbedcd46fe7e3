// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "artriage/model.hpp"
#include "artriage/repo_context.hpp"

namespace artriage {

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RawScannerReport {
    Tool tool = Tool::semgrep; // semgrep or trivy
    json payload;
    std::string source_path;
};

/// Parses a scanner-native JSON report file and checks the payload's
/// structural signature against the declared tool.
RawScannerReport load_scanner_report(Tool tool, const std::filesystem::path& path);

struct WarningRecord {
    std::string source;
    std::string message;
};

struct IngestResult {
    std::vector<Finding> findings;
    std::vector<WarningRecord> warnings;
};

/// One Finding per semgrep result entry; category = code_issue.
IngestResult ingest_semgrep_report(const RawScannerReport& report, const std::string& artifact_id);

/// One Finding per trivy vulnerability; category = dependency_vuln.
IngestResult ingest_trivy_report(const RawScannerReport& report, const std::string& artifact_id);

/// A single pattern rule of the built-in scanner. `pattern` is a literal
/// unless `regex` is set. `file_glob` matches the basename, or the whole
/// repo-relative path when it contains '/'.
struct BuiltinRule {
    std::string rule_id;
    std::string pattern;
    bool regex = false;
    std::string file_glob = "*";
    std::string cwe;
    Severity severity = Severity::medium;
    std::string message_template;
};

/// Rules covering unsafe deserialization, shell-interpolated process
/// spawning, embedded private keys, and dynamic code evaluation.
std::vector<BuiltinRule> default_builtin_rules();

/// Loads rules from a JSON array file; validates patterns and id uniqueness.
std::vector<BuiltinRule> load_builtin_rules(const std::filesystem::path& path);

/// Scans the snapshot with the given rules. Emits at most one finding per
/// (file, rule), at the first matched line, ordered by (path, line, rule_id).
IngestResult builtin_scan(const RepoHandle& repo, const std::vector<BuiltinRule>& rules,
                          const std::string& artifact_id);

/// All findings of a corpus plus its two lookup indices.
struct FindingSet {
    std::vector<Finding> findings;
    std::map<FlagKey, std::vector<std::size_t>> by_flag;
    std::map<std::string, std::vector<std::size_t>> by_artifact;

    std::size_t size() const { return findings.size(); }
};

FindingSet merge_and_index(const std::vector<std::vector<Finding>>& batches);

} // namespace artriage
