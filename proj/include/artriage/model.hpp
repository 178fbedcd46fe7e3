// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace artriage {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Tool { semgrep, trivy, builtin };
enum class FindingCategory { code_issue, dependency_vuln, config_issue };
enum class Severity { low, medium, high, critical, unknown };
enum class SecurityLabel {
    contextual_risk,
    hardening_recommendation,
    benign_research_usage,
    false_positive,
};
enum class LabelCategory { security_relevant, non_security };
enum class TriValue { yes, no, uncertain };

std::string to_string(Tool t);
std::string to_string(FindingCategory c);
std::string to_string(Severity s);
std::string to_string(SecurityLabel l);
std::string to_string(LabelCategory c);
std::string to_string(TriValue v);

std::optional<Tool> parse_tool(std::string_view s);
std::optional<FindingCategory> parse_category(std::string_view s);
std::optional<Severity> parse_severity(std::string_view s);
std::optional<SecurityLabel> parse_security_label(std::string_view s);
std::optional<TriValue> parse_tri_value(std::string_view s);

/// Three-valued answer plus a short justification. The note may be empty
/// only when the value is `no`.
struct TriState {
    TriValue value = TriValue::uncertain;
    std::string note;

    bool operator==(const TriState&) const = default;

    /// Renders as "yes - <note>" (or bare "no" when the note is empty).
    std::string render() const;
};

/// Inverse of TriState::render. Returns nullopt when the text does not
/// start with yes/no/uncertain.
std::optional<TriState> parse_tristate(std::string_view text);

/// One normalized scanner result.
struct Finding {
    std::string artifact_id;
    Tool tool = Tool::builtin;
    std::string finding_id;
    FindingCategory category = FindingCategory::code_issue;
    Severity severity = Severity::unknown;
    std::string file;
    std::optional<int> line;
    std::string message;
    std::optional<std::string> package;
    std::optional<std::string> version;
    std::vector<std::string> cwe_ids;
    std::vector<std::string> cve_ids;
    std::optional<double> cvss;

    bool operator==(const Finding&) const = default;
};

/// Field errors for Finding invariants; empty means the record is valid.
std::vector<std::string> validate_finding(const Finding& f);

/// Deduplicated identity of a scanner rule/CVE across findings.
struct FlagKey {
    Tool tool = Tool::builtin;
    std::string finding_id;

    auto operator<=>(const FlagKey&) const = default;
    std::string render() const;
};

FlagKey flag_key(const Finding& f);

/// Stable reference to one finding instance (used by sample plans, gold
/// annotations and agent traces).
struct FindingRef {
    std::string artifact_id;
    Tool tool = Tool::builtin;
    std::string finding_id;
    std::string file;
    std::optional<int> line;

    auto operator<=>(const FindingRef&) const = default;
    std::string render() const;
};

FindingRef make_ref(const Finding& f);
ojson ref_to_json(const FindingRef& r);
FindingRef ref_from_json(const json& j);

/// The four contextual dimensions used to judge practical exploitability.
struct ContextDimensions {
    TriState attacker_controlled_input;
    TriState reachability;
    std::string execution_context;
    std::string exploitation_condition;

    bool operator==(const ContextDimensions&) const = default;
};

/// Structured verdict for one finding. The two tri-state fields are kept in
/// rendered form ("yes|no|uncertain - <note>") to match the output schema.
struct Assessment {
    SecurityLabel security_label = SecurityLabel::false_positive;
    std::string code_purpose;
    std::string execution_context;
    std::string required_conditions_for_exploit;
    std::string input_controlled_by_attacker;
    std::string reachable_in_artifact_execution;
    std::string evidence_snippet;
    std::string reasoning;
    std::string recommendation;

    bool operator==(const Assessment&) const = default;
};

/// Canonical key order of the serialized assessment object.
inline constexpr std::array<std::string_view, 9> kAssessmentKeys = {
    "security_label",
    "code_purpose",
    "execution_context",
    "required_conditions_for_exploit",
    "input_controlled_by_attacker",
    "reachable_in_artifact_execution",
    "evidence_snippet",
    "reasoning",
    "recommendation",
};

struct ValidationResult {
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

/// Maps each label to security_relevant or non_security. FALSE_POSITIVE is
/// the only non-security label.
LabelCategory label_category(SecurityLabel label);

ValidationResult validate_assessment(const Assessment& a);

/// Canonical serialization: one JSON object, the nine keys in fixed order,
/// two-space indent, UTF-8. Throws std::invalid_argument on an invalid
/// assessment.
std::string serialize_assessment(const Assessment& a);

/// Parses canonical (or any equivalent) assessment text. Rejects unknown,
/// missing or non-string keys, naming the offending key.
Assessment parse_assessment(const std::string& text);

// Findings exchange format: newline-delimited JSON records.
ojson finding_to_json(const Finding& f);
Finding finding_from_json(const json& j);
std::string write_findings_ndjson(const std::vector<Finding>& findings);
std::vector<Finding> read_findings_ndjson(const std::string& text);

} // namespace artriage
