// SPDX-License-Identifier: Apache-2.0
#include "artriage/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <regex>
#include <set>

namespace artriage {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Explicit, exhaustive, case-insensitive severity tables. Anything
// unmapped becomes `unknown` plus a warning record.
Severity map_semgrep_severity(const std::string& raw, bool* mapped) {
    static const std::map<std::string, Severity> table = {
        {"error", Severity::high},   {"warning", Severity::medium},
        {"info", Severity::low},     {"low", Severity::low},
        {"medium", Severity::medium},{"high", Severity::high},
        {"critical", Severity::critical},
    };
    auto it = table.find(to_lower(raw));
    *mapped = it != table.end();
    return *mapped ? it->second : Severity::unknown;
}

Severity map_trivy_severity(const std::string& raw, bool* mapped) {
    static const std::map<std::string, Severity> table = {
        {"low", Severity::low},
        {"medium", Severity::medium},
        {"high", Severity::high},
        {"critical", Severity::critical},
        {"unknown", Severity::unknown},
    };
    auto it = table.find(to_lower(raw));
    *mapped = it != table.end();
    return *mapped ? it->second : Severity::unknown;
}

// Pulls "CWE-78" out of strings like "CWE-78: OS Command Injection".
std::vector<std::string> extract_cwe_ids(const json& value) {
    std::vector<std::string> out;
    static const std::regex cwe{R"(CWE-\d+)"};
    auto scan = [&](const std::string& text) {
        std::smatch m;
        if (std::regex_search(text, m, cwe)) out.push_back(m.str());
    };
    if (value.is_string()) {
        scan(value.get<std::string>());
    } else if (value.is_array()) {
        for (const auto& item : value) {
            if (item.is_string()) scan(item.get<std::string>());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool looks_like_semgrep(const json& payload) {
    return payload.is_object() && payload.contains("results") && payload.at("results").is_array();
}

bool looks_like_trivy(const json& payload) {
    return payload.is_object() && payload.contains("Results") && payload.at("Results").is_array();
}

} // namespace

RawScannerReport load_scanner_report(Tool tool, const std::filesystem::path& path) {
    if (tool != Tool::semgrep && tool != Tool::trivy) {
        throw IngestError("scanner reports come from semgrep or trivy only");
    }
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open scanner report: " + path.string());
    RawScannerReport report;
    report.tool = tool;
    report.source_path = path.string();
    try {
        in >> report.payload;
    } catch (const json::parse_error& e) {
        throw IngestError("scanner report is not valid JSON: " + path.string() + ": " + e.what());
    }
    if (tool == Tool::semgrep && !looks_like_semgrep(report.payload)) {
        throw IngestError("payload lacks the semgrep 'results' array: " + path.string());
    }
    if (tool == Tool::trivy && !looks_like_trivy(report.payload)) {
        throw IngestError("payload lacks the trivy 'Results' array: " + path.string());
    }
    return report;
}

IngestResult ingest_semgrep_report(const RawScannerReport& report,
                                   const std::string& artifact_id) {
    if (report.tool != Tool::semgrep) throw IngestError("report tool is not semgrep");
    if (!looks_like_semgrep(report.payload)) {
        throw IngestError("malformed semgrep payload: missing 'results' array");
    }
    IngestResult out;
    const auto& results = report.payload.at("results");
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& entry = results.at(i);
        auto fail = [&](const std::string& what) {
            throw IngestError("results[" + std::to_string(i) + "]: " + what);
        };
        if (!entry.is_object()) fail("entry is not an object");
        if (!entry.contains("check_id") || !entry.at("check_id").is_string())
            fail("missing 'check_id'");
        if (!entry.contains("path") || !entry.at("path").is_string()) fail("missing 'path'");

        Finding f;
        f.artifact_id = artifact_id;
        f.tool = Tool::semgrep;
        f.finding_id = entry.at("check_id").get<std::string>();
        f.category = FindingCategory::code_issue;
        f.file = entry.at("path").get<std::string>();
        if (entry.contains("start") && entry.at("start").is_object() &&
            entry.at("start").contains("line")) {
            f.line = entry.at("start").at("line").get<int>();
        }
        const json extra = entry.value("extra", json::object());
        f.message = extra.value("message", std::string{});
        if (extra.contains("severity") && extra.at("severity").is_string()) {
            bool mapped = false;
            auto raw = extra.at("severity").get<std::string>();
            f.severity = map_semgrep_severity(raw, &mapped);
            if (!mapped) {
                out.warnings.push_back({report.source_path,
                                        "results[" + std::to_string(i) +
                                            "]: unmapped severity '" + raw + "' -> unknown"});
            }
        } else {
            f.severity = Severity::unknown;
            out.warnings.push_back({report.source_path, "results[" + std::to_string(i) +
                                                            "]: missing severity -> unknown"});
        }
        if (extra.contains("metadata") && extra.at("metadata").is_object()) {
            const auto& meta = extra.at("metadata");
            if (meta.contains("cwe")) f.cwe_ids = extract_cwe_ids(meta.at("cwe"));
        }
        out.findings.push_back(std::move(f));
    }
    return out;
}

IngestResult ingest_trivy_report(const RawScannerReport& report, const std::string& artifact_id) {
    if (report.tool != Tool::trivy) throw IngestError("report tool is not trivy");
    if (!looks_like_trivy(report.payload)) {
        throw IngestError("malformed trivy payload: missing 'Results' array");
    }
    IngestResult out;
    const auto& results = report.payload.at("Results");
    for (size_t r = 0; r < results.size(); ++r) {
        const auto& section = results.at(r);
        if (!section.is_object()) {
            throw IngestError("Results[" + std::to_string(r) + "]: entry is not an object");
        }
        const std::string target = section.value("Target", std::string{});
        if (!section.contains("Vulnerabilities") || section.at("Vulnerabilities").is_null())
            continue;
        const auto& vulns = section.at("Vulnerabilities");
        if (!vulns.is_array()) {
            throw IngestError("Results[" + std::to_string(r) + "]: 'Vulnerabilities' not an array");
        }
        for (size_t i = 0; i < vulns.size(); ++i) {
            const auto& entry = vulns.at(i);
            auto where = "Results[" + std::to_string(r) + "].Vulnerabilities[" +
                         std::to_string(i) + "]";
            if (!entry.is_object()) throw IngestError(where + ": entry is not an object");
            if (!entry.contains("VulnerabilityID") || !entry.at("VulnerabilityID").is_string())
                throw IngestError(where + ": missing 'VulnerabilityID'");
            if (!entry.contains("PkgName") || !entry.at("PkgName").is_string())
                throw IngestError(where + ": missing 'PkgName'");

            Finding f;
            f.artifact_id = artifact_id;
            f.tool = Tool::trivy;
            f.finding_id = entry.at("VulnerabilityID").get<std::string>();
            f.category = FindingCategory::dependency_vuln;
            f.file = target;
            f.package = entry.at("PkgName").get<std::string>();
            if (entry.contains("InstalledVersion") && entry.at("InstalledVersion").is_string())
                f.version = entry.at("InstalledVersion").get<std::string>();
            std::string title = entry.value("Title", std::string{});
            std::string desc = entry.value("Description", std::string{});
            f.message = title.empty() ? desc : title;
            if (entry.contains("Severity") && entry.at("Severity").is_string()) {
                bool mapped = false;
                auto raw = entry.at("Severity").get<std::string>();
                f.severity = map_trivy_severity(raw, &mapped);
                if (!mapped) {
                    out.warnings.push_back(
                        {report.source_path, where + ": unmapped severity '" + raw +
                                                 "' -> unknown"});
                }
            } else {
                f.severity = Severity::unknown;
                out.warnings.push_back(
                    {report.source_path, where + ": missing severity -> unknown"});
            }
            if (entry.contains("CweIDs")) f.cwe_ids = extract_cwe_ids(entry.at("CweIDs"));
            if (f.finding_id.starts_with("CVE-")) f.cve_ids.push_back(f.finding_id);
            // Highest score across the available CVSS vectors.
            if (entry.contains("CVSS") && entry.at("CVSS").is_object()) {
                double best = -1.0;
                for (const auto& [_, source] : entry.at("CVSS").items()) {
                    if (!source.is_object()) continue;
                    for (const auto& [key, value] : source.items()) {
                        if (key.ends_with("Score") && value.is_number()) {
                            best = std::max(best, value.get<double>());
                        }
                    }
                }
                if (best >= 0.0) f.cvss = best;
            }
            out.findings.push_back(std::move(f));
        }
    }
    return out;
}

std::vector<BuiltinRule> default_builtin_rules() {
    return {
        {"builtin.deserialization.pickle-load", R"(pickle\.(load|loads)\s*\()", true, "*.py",
         "CWE-502", Severity::high,
         "pickle deserialization of potentially untrusted data"},
        {"builtin.deserialization.yaml-unsafe-load", R"(yaml\.(unsafe_)?load\s*\()", true, "*.py",
         "CWE-502", Severity::high,
         "yaml.load without an explicit safe loader can execute arbitrary objects"},
        {"builtin.deserialization.torch-load", R"(torch\.load\s*\()", true, "*.py", "CWE-502",
         Severity::medium, "torch.load unpickles model files; loading untrusted checkpoints is unsafe"},
        {"builtin.command.shell-spawn",
         R"(subprocess\.(Popen|call|run|check_output|check_call)\s*\([^)]*shell\s*=\s*True)", true,
         "*.py", "CWE-78", Severity::high,
         "subprocess spawned with shell=True; interpolated input can inject shell commands"},
        {"builtin.command.os-system", R"(os\.system\s*\()", true, "*.py", "CWE-78",
         Severity::medium, "os.system executes its argument through the shell"},
        {"builtin.secret.private-key", R"(-----BEGIN (RSA |EC |DSA |OPENSSH )?PRIVATE KEY-----)",
         true, "*", "CWE-798", Severity::high, "embedded private key material: {match}"},
        {"builtin.code-eval.eval-call", R"((^|[^\w.])eval\s*\()", true, "*.py", "CWE-95",
         Severity::medium, "dynamic evaluation of runtime-built expressions"},
        {"builtin.code-eval.exec-call", R"((^|[^\w.])exec\s*\()", true, "*.py", "CWE-95",
         Severity::medium, "dynamic execution of runtime-built code"},
    };
}

std::vector<BuiltinRule> load_builtin_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open rule file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw IngestError("rule file is not valid JSON: " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw IngestError("rule file must hold a JSON array");
    std::vector<BuiltinRule> rules;
    std::set<std::string> seen;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc.at(i);
        auto where = "rules[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw IngestError(where + ": entry is not an object");
        BuiltinRule rule;
        rule.rule_id = entry.value("rule_id", std::string{});
        if (rule.rule_id.empty()) throw IngestError(where + ": missing 'rule_id'");
        if (!seen.insert(rule.rule_id).second) {
            throw IngestError(where + ": duplicate rule_id '" + rule.rule_id + "'");
        }
        rule.pattern = entry.value("pattern", std::string{});
        if (rule.pattern.empty()) throw IngestError(where + ": missing 'pattern'");
        rule.regex = entry.value("regex", false);
        rule.file_glob = entry.value("file_glob", std::string{"*"});
        rule.cwe = entry.value("cwe", std::string{});
        static const std::regex cwe_shape{R"(CWE-\d+)"};
        if (!std::regex_match(rule.cwe, cwe_shape)) {
            throw IngestError(where + ": 'cwe' must look like CWE-<digits>");
        }
        auto severity = parse_severity(entry.value("severity", std::string{"medium"}));
        if (!severity) throw IngestError(where + ": unknown severity");
        rule.severity = *severity;
        rule.message_template = entry.value("message", entry.value("message_template", std::string{}));
        if (rule.message_template.empty()) throw IngestError(where + ": missing 'message'");
        if (rule.regex) {
            try {
                std::regex probe(rule.pattern);
            } catch (const std::regex_error& e) {
                throw IngestError(where + ": pattern does not compile: " + e.what());
            }
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

namespace {

std::string escape_literal(const std::string& text) {
    std::string esc;
    for (char c : text) {
        if (std::strchr(".^$+()[]{}|\\*?", c)) esc += '\\';
        esc += c;
    }
    return esc;
}

std::string basename_of(const std::string& rel) {
    auto pos = rel.find_last_of('/');
    return pos == std::string::npos ? rel : rel.substr(pos + 1);
}

bool glob_match_simple(const std::string& pattern, const std::string& text) {
    std::string re;
    for (size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '*') {
            if (i + 1 < pattern.size() && pattern[i + 1] == '*') {
                re += ".*";
                ++i;
            } else {
                re += "[^/]*";
            }
        } else if (c == '?') {
            re += "[^/]";
        } else if (std::strchr(".^$+()[]{}|\\", c)) {
            re += '\\';
            re += c;
        } else {
            re += c;
        }
    }
    return std::regex_match(text, std::regex(re));
}

std::string expand_template(std::string tpl, const std::string& file, int line,
                            const std::string& match) {
    auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
        for (size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
            s.replace(pos, from.size(), to);
        }
    };
    replace_all(tpl, "{file}", file);
    replace_all(tpl, "{line}", std::to_string(line));
    replace_all(tpl, "{match}", match);
    return tpl;
}

} // namespace

IngestResult builtin_scan(const RepoHandle& repo, const std::vector<BuiltinRule>& rules,
                          const std::string& artifact_id) {
    IngestResult out;
    std::vector<std::pair<const BuiltinRule*, std::regex>> compiled;
    for (const auto& rule : rules) {
        try {
            compiled.emplace_back(&rule,
                                  std::regex(rule.regex ? rule.pattern
                                                        : escape_literal(rule.pattern)));
        } catch (const std::regex_error& e) {
            throw IngestError("rule '" + rule.rule_id + "': pattern does not compile: " + e.what());
        }
    }

    for (const auto& rel : repo.file_index) {
        std::vector<std::string> lines;
        try {
            auto abs = repo.resolve(rel);
            std::ifstream in(abs, std::ios::binary);
            if (!in) {
                out.warnings.push_back({rel, "unreadable file skipped"});
                continue;
            }
            char probe[8192];
            in.read(probe, sizeof(probe));
            auto n = in.gcount();
            if (std::find(probe, probe + n, '\0') != probe + n) continue; // binary
            in.clear();
            in.seekg(0);
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                lines.push_back(line);
            }
        } catch (const std::exception& e) {
            out.warnings.push_back({rel, std::string("unreadable file skipped: ") + e.what()});
            continue;
        }

        const auto base = basename_of(rel);
        for (const auto& [rule, re] : compiled) {
            const auto& subject = rule->file_glob.find('/') != std::string::npos ? rel : base;
            if (!glob_match_simple(rule->file_glob, subject)) continue;
            for (size_t i = 0; i < lines.size(); ++i) {
                std::smatch m;
                if (!std::regex_search(lines[i], m, re)) continue;
                Finding f;
                f.artifact_id = artifact_id;
                f.tool = Tool::builtin;
                f.finding_id = rule->rule_id;
                f.category = FindingCategory::code_issue;
                f.severity = rule->severity;
                f.file = rel;
                f.line = static_cast<int>(i + 1);
                f.message = expand_template(rule->message_template, rel,
                                            static_cast<int>(i + 1), m.str());
                f.cwe_ids = {rule->cwe};
                out.findings.push_back(std::move(f));
                break; // first matched line only
            }
        }
    }
    std::sort(out.findings.begin(), out.findings.end(), [](const Finding& a, const Finding& b) {
        if (a.file != b.file) return a.file < b.file;
        if (a.line != b.line) return a.line < b.line;
        return a.finding_id < b.finding_id;
    });
    return out;
}

FindingSet merge_and_index(const std::vector<std::vector<Finding>>& batches) {
    FindingSet set;
    size_t total = 0;
    for (const auto& batch : batches) total += batch.size();
    set.findings.reserve(total);
    for (const auto& batch : batches) {
        for (const auto& f : batch) set.findings.push_back(f);
    }
    for (size_t i = 0; i < set.findings.size(); ++i) {
        set.by_flag[flag_key(set.findings[i])].push_back(i);
        set.by_artifact[set.findings[i].artifact_id].push_back(i);
    }
    return set;
}

} // namespace artriage
