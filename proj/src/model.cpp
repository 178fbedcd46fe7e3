// SPDX-License-Identifier: Apache-2.0
#include "artriage/model.hpp"

#include <regex>
#include <sstream>

namespace artriage {

std::string to_string(Tool t) {
    switch (t) {
        case Tool::semgrep: return "semgrep";
        case Tool::trivy: return "trivy";
        case Tool::builtin: return "builtin";
    }
    return "builtin";
}

std::string to_string(FindingCategory c) {
    switch (c) {
        case FindingCategory::code_issue: return "code_issue";
        case FindingCategory::dependency_vuln: return "dependency_vuln";
        case FindingCategory::config_issue: return "config_issue";
    }
    return "code_issue";
}

std::string to_string(Severity s) {
    switch (s) {
        case Severity::low: return "low";
        case Severity::medium: return "medium";
        case Severity::high: return "high";
        case Severity::critical: return "critical";
        case Severity::unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(SecurityLabel l) {
    switch (l) {
        case SecurityLabel::contextual_risk: return "CONTEXTUAL_RISK";
        case SecurityLabel::hardening_recommendation: return "HARDENING_RECOMMENDATION";
        case SecurityLabel::benign_research_usage: return "BENIGN_RESEARCH_USAGE";
        case SecurityLabel::false_positive: return "FALSE_POSITIVE";
    }
    return "FALSE_POSITIVE";
}

std::string to_string(LabelCategory c) {
    return c == LabelCategory::security_relevant ? "security_relevant" : "non_security";
}

std::string to_string(TriValue v) {
    switch (v) {
        case TriValue::yes: return "yes";
        case TriValue::no: return "no";
        case TriValue::uncertain: return "uncertain";
    }
    return "uncertain";
}

std::optional<Tool> parse_tool(std::string_view s) {
    if (s == "semgrep") return Tool::semgrep;
    if (s == "trivy") return Tool::trivy;
    if (s == "builtin") return Tool::builtin;
    return std::nullopt;
}

std::optional<FindingCategory> parse_category(std::string_view s) {
    if (s == "code_issue") return FindingCategory::code_issue;
    if (s == "dependency_vuln") return FindingCategory::dependency_vuln;
    if (s == "config_issue") return FindingCategory::config_issue;
    return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view s) {
    if (s == "low") return Severity::low;
    if (s == "medium") return Severity::medium;
    if (s == "high") return Severity::high;
    if (s == "critical") return Severity::critical;
    if (s == "unknown") return Severity::unknown;
    return std::nullopt;
}

std::optional<SecurityLabel> parse_security_label(std::string_view s) {
    if (s == "CONTEXTUAL_RISK") return SecurityLabel::contextual_risk;
    if (s == "HARDENING_RECOMMENDATION") return SecurityLabel::hardening_recommendation;
    if (s == "BENIGN_RESEARCH_USAGE") return SecurityLabel::benign_research_usage;
    if (s == "FALSE_POSITIVE") return SecurityLabel::false_positive;
    return std::nullopt;
}

std::optional<TriValue> parse_tri_value(std::string_view s) {
    if (s == "yes") return TriValue::yes;
    if (s == "no") return TriValue::no;
    if (s == "uncertain") return TriValue::uncertain;
    return std::nullopt;
}

std::string TriState::render() const {
    if (note.empty()) return to_string(value);
    return to_string(value) + " - " + note;
}

std::optional<TriState> parse_tristate(std::string_view text) {
    std::string_view head = text;
    std::string note;
    if (auto sep = text.find(" - "); sep != std::string_view::npos) {
        head = text.substr(0, sep);
        note = std::string(text.substr(sep + 3));
    }
    auto value = parse_tri_value(head);
    if (!value) return std::nullopt;
    return TriState{*value, std::move(note)};
}

std::vector<std::string> validate_finding(const Finding& f) {
    std::vector<std::string> errors;
    if (f.artifact_id.empty()) errors.push_back("artifact_id: must be non-empty");
    if (f.finding_id.empty()) errors.push_back("finding_id: must be non-empty");
    if (f.category == FindingCategory::dependency_vuln && (!f.package || f.package->empty()))
        errors.push_back("package: required for dependency_vuln findings");
    if (f.line && *f.line < 1) errors.push_back("line: must be >= 1");
    if (f.cvss && (*f.cvss < 0.0 || *f.cvss > 10.0))
        errors.push_back("cvss: must be within [0.0, 10.0]");
    static const std::regex cwe_pattern{R"(CWE-\d+)"};
    for (const auto& cwe : f.cwe_ids) {
        if (!std::regex_match(cwe, cwe_pattern)) {
            errors.push_back("cwe_ids: '" + cwe + "' does not match CWE-<digits>");
        }
    }
    return errors;
}

std::string FlagKey::render() const { return to_string(tool) + ":" + finding_id; }

FlagKey flag_key(const Finding& f) { return FlagKey{f.tool, f.finding_id}; }

std::string FindingRef::render() const {
    return artifact_id + "|" + to_string(tool) + "|" + finding_id + "|" + file + "|" +
           (line ? std::to_string(*line) : "-");
}

FindingRef make_ref(const Finding& f) {
    return FindingRef{f.artifact_id, f.tool, f.finding_id, f.file, f.line};
}

ojson ref_to_json(const FindingRef& r) {
    ojson j;
    j["artifact_id"] = r.artifact_id;
    j["tool"] = to_string(r.tool);
    j["finding_id"] = r.finding_id;
    j["file"] = r.file;
    if (r.line) j["line"] = *r.line;
    return j;
}

FindingRef ref_from_json(const json& j) {
    FindingRef r;
    r.artifact_id = j.at("artifact_id").get<std::string>();
    auto tool = parse_tool(j.at("tool").get<std::string>());
    if (!tool) throw ParseError("unknown tool '" + j.at("tool").get<std::string>() + "'");
    r.tool = *tool;
    r.finding_id = j.at("finding_id").get<std::string>();
    r.file = j.value("file", std::string{});
    if (j.contains("line") && !j.at("line").is_null()) r.line = j.at("line").get<int>();
    return r;
}

LabelCategory label_category(SecurityLabel label) {
    return label == SecurityLabel::false_positive ? LabelCategory::non_security
                                                  : LabelCategory::security_relevant;
}

namespace {

bool valid_rendered_tristate(const std::string& text, std::string* why) {
    auto ts = parse_tristate(text);
    if (!ts) {
        *why = "must begin with yes, no, or uncertain";
        return false;
    }
    if (ts->value != TriValue::no && ts->note.empty()) {
        *why = "missing explanation note";
        return false;
    }
    return true;
}

} // namespace

ValidationResult validate_assessment(const Assessment& a) {
    ValidationResult result;
    auto require = [&](const std::string& value, std::string_view field) {
        if (value.empty()) result.errors.push_back(std::string(field) + ": must be non-empty");
    };
    require(a.code_purpose, "code_purpose");
    require(a.execution_context, "execution_context");
    require(a.required_conditions_for_exploit, "required_conditions_for_exploit");
    require(a.evidence_snippet, "evidence_snippet");
    require(a.reasoning, "reasoning");
    require(a.recommendation, "recommendation");

    std::string why;
    if (a.input_controlled_by_attacker.empty()) {
        result.errors.push_back("input_controlled_by_attacker: must be non-empty");
    } else if (!valid_rendered_tristate(a.input_controlled_by_attacker, &why)) {
        result.errors.push_back("input_controlled_by_attacker: " + why);
    }
    if (a.reachable_in_artifact_execution.empty()) {
        result.errors.push_back("reachable_in_artifact_execution: must be non-empty");
    } else if (!valid_rendered_tristate(a.reachable_in_artifact_execution, &why)) {
        result.errors.push_back("reachable_in_artifact_execution: " + why);
    }
    return result;
}

std::string serialize_assessment(const Assessment& a) {
    auto validation = validate_assessment(a);
    if (!validation.ok()) {
        std::string msg = "cannot serialize invalid assessment:";
        for (const auto& e : validation.errors) msg += " [" + e + "]";
        throw std::invalid_argument(msg);
    }
    ojson j;
    j["security_label"] = to_string(a.security_label);
    j["code_purpose"] = a.code_purpose;
    j["execution_context"] = a.execution_context;
    j["required_conditions_for_exploit"] = a.required_conditions_for_exploit;
    j["input_controlled_by_attacker"] = a.input_controlled_by_attacker;
    j["reachable_in_artifact_execution"] = a.reachable_in_artifact_execution;
    j["evidence_snippet"] = a.evidence_snippet;
    j["reasoning"] = a.reasoning;
    j["recommendation"] = a.recommendation;
    return j.dump(2);
}

Assessment parse_assessment(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("assessment text is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("assessment text must be a JSON object");

    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto k : kAssessmentKeys) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) throw ParseError("unknown key '" + key + "'");
        if (!value.is_string()) throw ParseError("key '" + key + "' must hold a string");
    }
    for (auto k : kAssessmentKeys) {
        if (!j.contains(std::string(k))) throw ParseError("missing key '" + std::string(k) + "'");
    }

    Assessment a;
    const auto label_text = j.at("security_label").get<std::string>();
    auto label = parse_security_label(label_text);
    if (!label) throw ParseError("key 'security_label' holds unknown label '" + label_text + "'");
    a.security_label = *label;
    a.code_purpose = j.at("code_purpose").get<std::string>();
    a.execution_context = j.at("execution_context").get<std::string>();
    a.required_conditions_for_exploit = j.at("required_conditions_for_exploit").get<std::string>();
    a.input_controlled_by_attacker = j.at("input_controlled_by_attacker").get<std::string>();
    a.reachable_in_artifact_execution = j.at("reachable_in_artifact_execution").get<std::string>();
    a.evidence_snippet = j.at("evidence_snippet").get<std::string>();
    a.reasoning = j.at("reasoning").get<std::string>();
    a.recommendation = j.at("recommendation").get<std::string>();
    return a;
}

ojson finding_to_json(const Finding& f) {
    ojson j;
    j["artifact_id"] = f.artifact_id;
    j["tool"] = to_string(f.tool);
    j["finding_id"] = f.finding_id;
    j["category"] = to_string(f.category);
    j["severity"] = to_string(f.severity);
    j["file"] = f.file;
    if (f.line) j["line"] = *f.line;
    j["message"] = f.message;
    if (f.package) j["package"] = *f.package;
    if (f.version) j["version"] = *f.version;
    j["cwe_ids"] = f.cwe_ids;
    j["cve_ids"] = f.cve_ids;
    if (f.cvss) j["cvss"] = *f.cvss;
    return j;
}

Finding finding_from_json(const json& j) {
    Finding f;
    f.artifact_id = j.at("artifact_id").get<std::string>();
    auto tool = parse_tool(j.at("tool").get<std::string>());
    if (!tool) throw ParseError("unknown tool '" + j.at("tool").get<std::string>() + "'");
    f.tool = *tool;
    f.finding_id = j.at("finding_id").get<std::string>();
    auto category = parse_category(j.at("category").get<std::string>());
    if (!category) throw ParseError("unknown category '" + j.at("category").get<std::string>() + "'");
    f.category = *category;
    auto severity = parse_severity(j.at("severity").get<std::string>());
    if (!severity) throw ParseError("unknown severity '" + j.at("severity").get<std::string>() + "'");
    f.severity = *severity;
    f.file = j.at("file").get<std::string>();
    if (j.contains("line") && !j.at("line").is_null()) f.line = j.at("line").get<int>();
    f.message = j.value("message", std::string{});
    if (j.contains("package") && !j.at("package").is_null())
        f.package = j.at("package").get<std::string>();
    if (j.contains("version") && !j.at("version").is_null())
        f.version = j.at("version").get<std::string>();
    if (j.contains("cwe_ids")) f.cwe_ids = j.at("cwe_ids").get<std::vector<std::string>>();
    if (j.contains("cve_ids")) f.cve_ids = j.at("cve_ids").get<std::vector<std::string>>();
    if (j.contains("cvss") && !j.at("cvss").is_null()) f.cvss = j.at("cvss").get<double>();
    return f;
}

std::string write_findings_ndjson(const std::vector<Finding>& findings) {
    std::string out;
    for (const auto& f : findings) {
        out += finding_to_json(f).dump();
        out += '\n';
    }
    return out;
}

std::vector<Finding> read_findings_ndjson(const std::string& text) {
    std::vector<Finding> findings;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            findings.push_back(finding_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError("findings line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return findings;
}

} // namespace artriage
