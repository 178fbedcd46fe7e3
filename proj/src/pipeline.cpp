// SPDX-License-Identifier: Apache-2.0
#include "artriage/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <memory>
#include <regex>
#include <sstream>
#include <thread>

#include "artriage/remote_backend.hpp"

namespace fs = std::filesystem;

namespace artriage {

namespace {

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out << content;
}

std::unique_ptr<Backend> make_backend(const RunConfig& config, const RepoHandle& repo) {
    if (config.backend == BackendKind::heuristic) {
        return std::make_unique<HeuristicBackend>(repo);
    }
    RemoteConfig remote;
    remote.endpoint_url = config.endpoint_url;
    remote.model_name = config.model_name;
    remote.api_key = config.api_key;
    return std::make_unique<RemoteBackend>(remote);
}

} // namespace

BatchAnalysis analyze_batch(const std::vector<Finding>& findings, const RepoHandle& repo,
                            const BackendFactory& make_backend, const Budget& budget,
                            int workers) {
    const size_t n = findings.size();
    std::vector<std::optional<AnalysisResult>> results(n);
    std::vector<std::optional<std::string>> failures(n);
    std::atomic<size_t> cursor{0};
    auto drain = [&]() {
        for (size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
            try {
                auto backend = make_backend();
                results[i] = analyze_finding(findings[i], repo, *backend, budget);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    workers = std::max(1, workers);
    if (workers == 1 || n <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
        for (auto& t : pool) t.join();
    }

    BatchAnalysis batch;
    for (size_t i = 0; i < n; ++i) {
        auto ref = make_ref(findings[i]);
        if (results[i]) {
            batch.assessments.emplace_back(ref, results[i]->assessment);
            batch.traces.push_back(std::move(results[i]->trace));
        } else {
            batch.errors.push_back({ref, failures[i].value_or("analysis failed")});
        }
    }
    return batch;
}

std::vector<ChecklistItem> render_checklist(
    const FindingSet& findings, const std::vector<std::pair<FindingRef, Assessment>>& assessments,
    const RepoHandle& repo) {
    std::vector<ChecklistItem> items(5);
    items[0].question = "Does the artifact process external or user-controlled input?";
    items[1].question = "Are unsafe operations like deserialization and shell execution properly "
                        "validated or restricted?";
    items[2].question = "Are third-party dependencies free from known critical vulnerabilities?";
    items[3].question = "Is the intended execution context (offline experiment vs. deployment) "
                        "clearly documented?";
    items[4].question = "Are assumptions about trust boundaries and input sources explicitly "
                        "stated?";

    // An empty snapshot supports no conclusion at all.
    if (repo.file_index.empty()) {
        for (auto& item : items) {
            item.status = "unclear";
            item.evidence = "empty repository snapshot";
        }
        return items;
    }

    auto label_of = [&](const FindingRef& ref) -> std::optional<SecurityLabel> {
        for (const auto& [r, a] : assessments) {
            if (r == ref) return a.security_label;
        }
        return std::nullopt;
    };

    // (1) External input: any attacker-controlled dimension answered yes.
    {
        std::string yes_ref, uncertain_ref;
        bool any = false;
        for (const auto& [ref, a] : assessments) {
            any = true;
            if (a.input_controlled_by_attacker.starts_with("yes") && yes_ref.empty()) {
                yes_ref = ref.render() + ": " + a.input_controlled_by_attacker;
            } else if (a.input_controlled_by_attacker.starts_with("uncertain") &&
                       uncertain_ref.empty()) {
                uncertain_ref = ref.render() + ": " + a.input_controlled_by_attacker;
            }
        }
        if (!yes_ref.empty()) {
            items[0] = {items[0].question, "yes", yes_ref};
        } else if (!any) {
            items[0] = {items[0].question, "unclear",
                        "no findings were analyzed, so input handling was not assessed"};
        } else if (!uncertain_ref.empty()) {
            items[0] = {items[0].question, "unclear", uncertain_ref};
        } else {
            items[0] = {items[0].question, "no",
                        "no analyzed finding shows attacker-controlled input"};
        }
    }

    // (2) Unsafe operations: CWE-502/78/95 findings not ruled out as false positives.
    {
        const std::vector<std::string> unsafe_cwes = {"CWE-502", "CWE-78", "CWE-95"};
        std::string live_ref, ruled_out_ref;
        for (size_t i = 0; i < findings.findings.size(); ++i) {
            const auto& f = findings.findings[i];
            bool unsafe = std::any_of(f.cwe_ids.begin(), f.cwe_ids.end(), [&](const auto& c) {
                return std::find(unsafe_cwes.begin(), unsafe_cwes.end(), c) != unsafe_cwes.end();
            });
            if (!unsafe) continue;
            auto label = label_of(make_ref(f));
            if (label && *label != SecurityLabel::false_positive) {
                if (live_ref.empty()) {
                    live_ref = make_ref(f).render() + " labeled " + to_string(*label);
                }
            } else if (ruled_out_ref.empty()) {
                ruled_out_ref = make_ref(f).render();
            }
        }
        if (!live_ref.empty()) {
            items[1] = {items[1].question, "no", live_ref};
        } else if (!ruled_out_ref.empty()) {
            items[1] = {items[1].question, "yes",
                        "flagged unsafe operations are not on executed paths (" + ruled_out_ref +
                            ")"};
        } else {
            items[1] = {items[1].question, "yes",
                        "no unsafe deserialization, shell execution, or dynamic evaluation "
                        "findings"};
        }
    }

    // (3) Critical dependency vulnerabilities that actually affect execution.
    {
        std::string live_ref, unused_ref;
        for (const auto& f : findings.findings) {
            if (f.category != FindingCategory::dependency_vuln ||
                f.severity != Severity::critical) {
                continue;
            }
            auto label = label_of(make_ref(f));
            if (label && *label != SecurityLabel::false_positive) {
                if (live_ref.empty()) {
                    live_ref = make_ref(f).render() + " labeled " + to_string(*label);
                }
            } else if (unused_ref.empty()) {
                unused_ref = make_ref(f).render() +
                             ": package-usage search found no import, the pinned dependency "
                             "does not affect execution";
            }
        }
        if (!live_ref.empty()) {
            items[2] = {items[2].question, "no", live_ref};
        } else if (!unused_ref.empty()) {
            items[2] = {items[2].question, "yes", unused_ref};
        } else {
            items[2] = {items[2].question, "yes",
                        "no critical dependency vulnerability among the analyzed findings"};
        }
    }

    auto entries = detect_entrypoints(repo);

    // (4) Documented execution context: a quoted run command or run target.
    {
        std::string evidence;
        for (const auto& e : entries) {
            if (e.kind == EntryPointKind::documented_run_command ||
                e.kind == EntryPointKind::makefile_target) {
                evidence = e.file + ": " + e.evidence;
                break;
            }
        }
        if (!evidence.empty()) {
            items[3] = {items[3].question, "yes", evidence};
        } else {
            items[3] = {items[3].question, "unclear",
                        "no documented run command or run target found"};
        }
    }

    // (5) Trust-boundary statements in the README.
    {
        static const std::regex trust_stmt{R"(trust|untrusted|assumption|assumes\b|assume\b)",
                                           std::regex::icase};
        std::string evidence;
        for (const auto& rel : repo.file_index) {
            auto base = rel.substr(rel.find_last_of('/') + 1);
            std::transform(base.begin(), base.end(), base.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (!base.starts_with("readme")) continue;
            try {
                std::istringstream text(read_file(repo, rel));
                std::string line;
                while (std::getline(text, line)) {
                    if (std::regex_search(line, trust_stmt)) {
                        evidence = rel + ": " + line;
                        break;
                    }
                }
            } catch (const std::exception&) {
                continue;
            }
            if (!evidence.empty()) break;
        }
        if (!evidence.empty()) {
            items[4] = {items[4].question, "yes", evidence};
        } else {
            items[4] = {items[4].question, "unclear",
                        "no explicit statement about trust boundaries or input sources found"};
        }
    }
    return items;
}

ReportDocument run_pipeline(const RunConfig& config) {
    // Startup validation happens before any analysis.
    if (config.backend == BackendKind::remote_model &&
        (config.endpoint_url.empty() || config.model_name.empty())) {
        throw ConfigError("remote backend requires endpoint url and model name");
    }
    if (config.artifact_id.empty()) throw ConfigError("artifact_id must be non-empty");
    for (const auto& p : config.semgrep_reports) {
        if (!fs::exists(p)) throw ConfigError("semgrep report not found: " + p.string());
    }
    for (const auto& p : config.trivy_reports) {
        if (!fs::exists(p)) throw ConfigError("trivy report not found: " + p.string());
    }
    RepoHandle repo = RepoHandle::open(config.repo_path); // throws NavigationError

    // Scan stage.
    std::vector<std::vector<Finding>> batches;
    if (config.builtin_scan_enabled) {
        auto rules = config.builtin_rules_path ? load_builtin_rules(*config.builtin_rules_path)
                                               : default_builtin_rules();
        batches.push_back(builtin_scan(repo, rules, config.artifact_id).findings);
    }
    for (const auto& p : config.semgrep_reports) {
        auto report = load_scanner_report(Tool::semgrep, p);
        batches.push_back(ingest_semgrep_report(report, config.artifact_id).findings);
    }
    for (const auto& p : config.trivy_reports) {
        auto report = load_scanner_report(Tool::trivy, p);
        batches.push_back(ingest_trivy_report(report, config.artifact_id).findings);
    }
    FindingSet set = merge_and_index(batches);

    // Per-finding analysis; each session owns its trace.
    auto batch = analyze_batch(
        set.findings, repo, [&]() { return make_backend(config, repo); }, config.budget,
        config.worker_count);

    ReportDocument doc;
    doc.summary = compute_summary(set);
    doc.assessments = std::move(batch.assessments);
    doc.errors = std::move(batch.errors);
    const auto& traces = batch.traces;
    const long assessed = static_cast<long>(doc.assessments.size());
    for (const auto& [_, a] : doc.assessments) doc.label_tally[a.security_label].count += 1;
    for (auto& [_, tally] : doc.label_tally) tally.pct = percentage(tally.count, assessed);
    doc.checklist = render_checklist(set, doc.assessments, repo);
    if (!traces.empty() && doc.summary.artifact_count >= 1) {
        doc.cost = cost_summary(traces, config.prices, doc.summary.artifact_count);
    }

    // Persist the run's artifacts.
    fs::create_directories(config.output_dir);
    write_text_file(config.output_dir / "findings.ndjson", write_findings_ndjson(set.findings));
    write_text_file(config.output_dir / "assessments.ndjson",
                    write_assessments_ndjson(doc.assessments));
    std::string trace_lines;
    for (const auto& t : traces) {
        trace_lines += trace_to_json(t).dump();
        trace_lines += '\n';
    }
    write_text_file(config.output_dir / "traces.ndjson", trace_lines);
    write_text_file(config.output_dir / "report.json", render_report(doc, ReportFormat::json));
    write_text_file(config.output_dir / "report.md", render_report(doc, ReportFormat::markdown));
    return doc;
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

ojson report_to_json(const ReportDocument& doc) {
    ojson j;
    j["summary"] = summary_to_json(doc.summary);
    ojson assessments = ojson::array();
    for (const auto& [ref, a] : doc.assessments) {
        auto entry = ref_to_json(ref);
        entry["assessment"] = ojson::parse(serialize_assessment(a));
        assessments.push_back(entry);
    }
    j["assessments"] = assessments;
    ojson tally;
    for (const auto& [label, t] : doc.label_tally) {
        tally[to_string(label)] = {{"count", t.count}, {"pct", t.pct}};
    }
    j["label_tally"] = tally;
    ojson checklist = ojson::array();
    for (const auto& item : doc.checklist) {
        checklist.push_back({{"question", item.question},
                             {"status", item.status},
                             {"evidence", item.evidence}});
    }
    j["checklist"] = checklist;
    j["cost"] = doc.cost ? json(cost_to_json(*doc.cost)) : json(nullptr);
    ojson errors = ojson::array();
    for (const auto& e : doc.errors) {
        auto entry = ref_to_json(e.ref);
        entry["message"] = e.message;
        errors.push_back(entry);
    }
    j["errors"] = errors;
    return j;
}

ReportDocument report_from_json(const json& j) {
    ReportDocument doc;
    doc.summary = summary_from_json(j.at("summary"));
    for (const auto& entry : j.at("assessments")) {
        doc.assessments.emplace_back(ref_from_json(entry),
                                     parse_assessment(entry.at("assessment").dump()));
    }
    for (const auto& [name, t] : j.at("label_tally").items()) {
        auto label = parse_security_label(name);
        if (!label) throw ParseError("unknown label '" + name + "' in tally");
        doc.label_tally[*label] = {t.at("count").get<long>(), t.at("pct").get<double>()};
    }
    for (const auto& item : j.at("checklist")) {
        doc.checklist.push_back({item.at("question").get<std::string>(),
                                 item.at("status").get<std::string>(),
                                 item.at("evidence").get<std::string>()});
    }
    if (j.contains("cost") && !j.at("cost").is_null()) {
        doc.cost = cost_from_json(j.at("cost"));
    }
    for (const auto& entry : j.at("errors")) {
        doc.errors.push_back({ref_from_json(entry), entry.at("message").get<std::string>()});
    }
    return doc;
}

std::string render_report(const ReportDocument& doc, ReportFormat format) {
    if (format == ReportFormat::json) return report_to_json(doc).dump(2);

    std::ostringstream out;
    out << "# Artifact security report\n\n";
    out << "## Summary\n\n";
    out << "| Tool | Findings |\n|---|---|\n";
    for (const auto& [tool, count] : doc.summary.per_tool) {
        out << "| " << to_string(tool) << " | " << count << " |\n";
    }
    out << "| total | " << doc.summary.total_findings << " |\n\n";
    out << "- distinct flags: " << doc.summary.distinct_flags << "\n";
    out << "- artifacts: " << doc.summary.artifact_count << "\n\n";

    out << "## Label tally\n\n";
    out << "| Label | Count |\n|---|---|\n";
    for (const auto& [label, tally] : doc.label_tally) {
        out << "| " << to_string(label) << " | " << tally.count << " (" << pct_text(tally.pct)
            << ") |\n";
    }
    out << "\n";

    if (!doc.summary.top_cwes.empty()) {
        out << "## Top CWEs\n\n| CWE | Artifacts |\n|---|---|\n";
        for (const auto& [cwe, count] : doc.summary.top_cwes) {
            out << "| " << cwe << " | " << count << " |\n";
        }
        out << "\n";
    }

    out << "## Security checklist\n\n";
    for (const auto& item : doc.checklist) {
        out << "- [" << item.status << "] " << item.question << "\n  - evidence: "
            << item.evidence << "\n";
    }
    out << "\n";

    if (doc.cost) {
        out << "## Cost\n\n";
        out << "- input tokens: " << doc.cost->input_tokens << "\n";
        out << "- output tokens: " << doc.cost->output_tokens << "\n";
        out << "- total: " << format_currency(doc.cost->total_cost) << "\n";
        out << "- per finding: " << format_currency(doc.cost->per_finding_cost) << "\n";
        out << "- per artifact: " << format_currency(doc.cost->per_artifact_cost, true) << "\n";
        out << "- mean seconds per finding: " << doc.cost->mean_seconds_per_finding << "\n\n";
    }

    out << "## Assessments\n\n";
    for (const auto& [ref, a] : doc.assessments) {
        out << "### " << ref.render() << "\n\n";
        out << "- security_label: " << to_string(a.security_label) << "\n";
        out << "- code_purpose: " << a.code_purpose << "\n";
        out << "- execution_context: " << a.execution_context << "\n";
        out << "- required_conditions_for_exploit: " << a.required_conditions_for_exploit << "\n";
        out << "- input_controlled_by_attacker: " << a.input_controlled_by_attacker << "\n";
        out << "- reachable_in_artifact_execution: " << a.reachable_in_artifact_execution << "\n";
        out << "- evidence_snippet: " << a.evidence_snippet << "\n";
        out << "- reasoning: " << a.reasoning << "\n";
        out << "- recommendation: " << a.recommendation << "\n\n";
    }

    if (!doc.errors.empty()) {
        out << "## Analysis errors\n\n";
        for (const auto& e : doc.errors) {
            out << "- " << e.ref.render() << ": " << e.message << "\n";
        }
        out << "\n";
    }
    return out.str();
}

ojson trace_to_json(const AgentTrace& trace) {
    ojson j;
    j["ref"] = ref_to_json(trace.finding_ref);
    j["backend"] = to_string(trace.backend);
    j["input_tokens"] = trace.input_tokens;
    j["output_tokens"] = trace.output_tokens;
    j["wall_seconds"] = trace.wall_seconds;
    ojson steps = ojson::array();
    for (const auto& s : trace.steps) {
        ojson step;
        step["kind"] = s.action.kind == AgentAction::Kind::tool_call ? "tool_call" : "final_answer";
        if (s.action.kind == AgentAction::Kind::tool_call) {
            step["tool_name"] = s.action.tool_name;
            step["arguments"] = s.action.arguments;
        } else if (s.action.answer) {
            step["answer"] = ojson::parse(serialize_assessment(*s.action.answer));
        }
        if (!s.action.rationale.empty()) step["rationale"] = s.action.rationale;
        if (!s.observation.empty()) step["observation"] = s.observation;
        steps.push_back(step);
    }
    j["steps"] = steps;
    return j;
}

std::string write_assessments_ndjson(
    const std::vector<std::pair<FindingRef, Assessment>>& assessments) {
    std::string out;
    for (const auto& [ref, a] : assessments) {
        auto j = ref_to_json(ref);
        j["assessment"] = ojson::parse(serialize_assessment(a));
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::pair<FindingRef, Assessment>> read_assessments_ndjson(const std::string& text) {
    std::vector<std::pair<FindingRef, Assessment>> out;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            out.emplace_back(ref_from_json(j), parse_assessment(j.at("assessment").dump()));
        } catch (const std::exception& e) {
            throw ParseError("assessments line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace artriage
