// SPDX-License-Identifier: Apache-2.0
//
// artriage — context-aware security triage for static-analysis findings in
// research code repositories. Subcommands compose through files: scan emits
// findings, analyze emits assessments and traces, stats/sample/evaluate work
// on those outputs, report runs the whole pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "artriage/corpus_stats.hpp"
#include "artriage/evaluation.hpp"
#include "artriage/ingest.hpp"
#include "artriage/pipeline.hpp"
#include "artriage/remote_backend.hpp"

namespace fs = std::filesystem;
using namespace artriage;

namespace {

constexpr const char* kApiKeyEnv = "ARTRIAGE_API_KEY";

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
        return;
    }
    auto parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + out_path);
    out << text;
}

std::string env_api_key() {
    const char* key = std::getenv(kApiKeyEnv);
    return key ? key : "";
}

BackendKind parse_backend_flag(const std::string& name) {
    if (name == "heuristic") return BackendKind::heuristic;
    if (name == "remote") return BackendKind::remote_model;
    throw ConfigError("unknown backend '" + name + "' (choose heuristic or remote)");
}

int cmd_scan(const std::string& repo_path, const std::string& artifact_id,
             const std::vector<std::string>& semgrep_paths,
             const std::vector<std::string>& trivy_paths, const std::string& rules_path,
             bool no_builtin, const std::string& out_path) {
    auto repo = RepoHandle::open(repo_path);
    std::vector<std::vector<Finding>> batches;
    std::vector<WarningRecord> warnings;
    if (!no_builtin) {
        auto rules = rules_path.empty() ? default_builtin_rules()
                                        : load_builtin_rules(rules_path);
        auto result = builtin_scan(repo, rules, artifact_id);
        batches.push_back(std::move(result.findings));
        warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
    }
    for (const auto& p : semgrep_paths) {
        auto result = ingest_semgrep_report(load_scanner_report(Tool::semgrep, p), artifact_id);
        batches.push_back(std::move(result.findings));
        warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
    }
    for (const auto& p : trivy_paths) {
        auto result = ingest_trivy_report(load_scanner_report(Tool::trivy, p), artifact_id);
        batches.push_back(std::move(result.findings));
        warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
    }
    auto set = merge_and_index(batches);
    emit(write_findings_ndjson(set.findings), out_path);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << w.source << ": " << w.message << "\n";
    }
    std::cerr << set.findings.size() << " finding(s) written\n";
    return 0;
}

int cmd_analyze(const std::string& repo_path, const std::string& findings_path,
                const std::string& backend_name, const std::string& endpoint,
                const std::string& model, int max_steps, int workers,
                const std::string& out_dir) {
    auto repo = RepoHandle::open(repo_path);
    auto findings = read_findings_ndjson(slurp(findings_path));
    auto backend_kind = parse_backend_flag(backend_name);
    if (backend_kind == BackendKind::remote_model && (endpoint.empty() || model.empty())) {
        throw ConfigError("remote backend requires --endpoint and --model");
    }
    Budget budget;
    if (max_steps > 0) budget.max_steps = max_steps;

    auto make_backend = [&]() -> std::unique_ptr<Backend> {
        if (backend_kind == BackendKind::heuristic) {
            return std::make_unique<HeuristicBackend>(repo);
        }
        RemoteConfig rc;
        rc.endpoint_url = endpoint;
        rc.model_name = model;
        rc.api_key = env_api_key();
        return std::make_unique<RemoteBackend>(rc);
    };
    auto batch = analyze_batch(findings, repo, make_backend, budget, workers);

    std::string trace_lines;
    for (const auto& t : batch.traces) {
        trace_lines += trace_to_json(t).dump();
        trace_lines += '\n';
    }
    for (const auto& e : batch.errors) {
        std::cerr << "error: " << e.ref.render() << ": " << e.message << "\n";
    }
    fs::create_directories(out_dir);
    emit(write_assessments_ndjson(batch.assessments),
         (fs::path(out_dir) / "assessments.ndjson").string());
    emit(trace_lines, (fs::path(out_dir) / "traces.ndjson").string());
    std::cerr << batch.assessments.size() << " assessment(s) written, " << batch.errors.size()
              << " error(s)\n";
    return batch.errors.empty() ? 0 : 2;
}

int cmd_stats(const std::string& findings_path, int top, const std::string& format,
              const std::string& out_path) {
    auto findings = read_findings_ndjson(slurp(findings_path));
    auto set = merge_and_index({findings});
    auto summary = compute_summary(set, static_cast<size_t>(top));
    emit(format == "table" ? summary_to_text(summary) : summary_to_json(summary).dump(2),
         out_path);
    return 0;
}

int cmd_sample(const std::string& findings_path, int k, int min_artifacts, int per_flag,
               std::uint64_t seed, const std::string& out_path) {
    auto findings = read_findings_ndjson(slurp(findings_path));
    auto set = merge_and_index({findings});
    auto flags = select_prevalent_flags(set, k, min_artifacts);
    auto plan = sample_findings(set, flags, per_flag, seed);
    plan.k = k;
    plan.min_artifacts = min_artifacts;
    emit(plan_to_json(plan).dump(2), out_path);
    return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path,
                 const std::string& mode, const std::string& traces_path, double input_price,
                 double output_price, long artifact_count, const std::string& format,
                 const std::string& out_path) {
    ojson output;
    if (!gold_path.empty()) {
        if (pred_path.empty()) throw ConfigError("--pred is required with --gold");
        auto gold = read_gold_ndjson(slurp(gold_path));
        auto assessments = read_assessments_ndjson(slurp(pred_path));
        std::vector<PredictedLabel> pred;
        pred.reserve(assessments.size());
        for (const auto& [ref, a] : assessments) pred.push_back({ref, a.security_label});
        auto report = mode == "multiclass" ? multiclass_metrics(gold, pred)
                                           : binary_metrics(gold, pred);
        if (format == "table") {
            std::ostringstream text;
            text.setf(std::ios::fixed);
            text.precision(2);
            text << "mode: " << mode << "\n";
            text << "accuracy: " << report.accuracy * 100.0 << "%\n";
            text << "macro_f1: " << report.macro_f1 * 100.0 << "%\n";
            text << confusion_to_text(report.confusion);
            emit(text.str(), out_path);
            return 0;
        }
        output["metrics"] = metrics_to_json(report);
    }
    if (!traces_path.empty()) {
        std::vector<AgentTrace> traces;
        std::istringstream in(slurp(traces_path));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = json::parse(line);
            AgentTrace t;
            t.finding_ref = ref_from_json(j.at("ref"));
            t.input_tokens = j.value("input_tokens", 0L);
            t.output_tokens = j.value("output_tokens", 0L);
            t.wall_seconds = j.value("wall_seconds", 0.0);
            traces.push_back(std::move(t));
        }
        output["cost"] = cost_to_json(
            cost_summary(traces, PriceConfig{input_price, output_price}, artifact_count));
    }
    if (output.empty()) throw ConfigError("nothing to evaluate: pass --gold/--pred or --traces");
    emit(output.dump(2), out_path);
    return 0;
}

int cmd_report(const std::string& repo_path, const std::string& artifact_id,
               const std::vector<std::string>& semgrep_paths,
               const std::vector<std::string>& trivy_paths, const std::string& rules_path,
               bool no_builtin, const std::string& backend_name, const std::string& endpoint,
               const std::string& model, int max_steps, std::uint64_t seed, int workers,
               const std::string& out_dir, const std::string& format,
               const std::string& findings_path, const std::string& assessments_path) {
    ReportDocument doc;
    if (!findings_path.empty() && !assessments_path.empty()) {
        // Assemble a report from earlier stage outputs.
        auto findings = read_findings_ndjson(slurp(findings_path));
        auto set = merge_and_index({findings});
        doc.summary = compute_summary(set);
        doc.assessments = read_assessments_ndjson(slurp(assessments_path));
        const long assessed = static_cast<long>(doc.assessments.size());
        for (const auto& [_, a] : doc.assessments) doc.label_tally[a.security_label].count += 1;
        for (auto& [_, t] : doc.label_tally) t.pct = percentage(t.count, assessed);
        auto repo = RepoHandle::open(repo_path);
        doc.checklist = render_checklist(set, doc.assessments, repo);
        fs::create_directories(out_dir);
        emit(render_report(doc, ReportFormat::json), (fs::path(out_dir) / "report.json").string());
        emit(render_report(doc, ReportFormat::markdown),
             (fs::path(out_dir) / "report.md").string());
    } else {
        RunConfig config;
        config.repo_path = repo_path;
        config.artifact_id = artifact_id;
        for (const auto& p : semgrep_paths) config.semgrep_reports.emplace_back(p);
        for (const auto& p : trivy_paths) config.trivy_reports.emplace_back(p);
        if (!rules_path.empty()) config.builtin_rules_path = rules_path;
        config.builtin_scan_enabled = !no_builtin;
        config.backend = parse_backend_flag(backend_name);
        config.endpoint_url = endpoint;
        config.model_name = model;
        config.api_key = env_api_key();
        if (max_steps > 0) config.budget.max_steps = max_steps;
        config.seed = seed;
        config.worker_count = workers;
        config.output_dir = out_dir;
        doc = run_pipeline(config);
    }
    std::cout << render_report(doc, format == "markdown" ? ReportFormat::markdown
                                                         : ReportFormat::json);
    return doc.errors.empty() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"context-aware security triage for research code repositories"};
    app.require_subcommand(1);

    // scan
    auto* scan = app.add_subcommand("scan", "normalize scanner reports and run the builtin scanner");
    std::string repo_path, artifact_id = "artifact", rules_path, out_path;
    std::vector<std::string> semgrep_paths, trivy_paths;
    bool no_builtin = false;
    scan->add_option("--repo", repo_path, "repository root")->required();
    scan->add_option("--artifact-id", artifact_id, "artifact identifier");
    scan->add_option("--semgrep-report", semgrep_paths, "semgrep JSON report file(s)");
    scan->add_option("--trivy-report", trivy_paths, "trivy JSON report file(s)");
    scan->add_option("--rules", rules_path, "builtin rule file (JSON)");
    scan->add_flag("--no-builtin", no_builtin, "skip the builtin pattern scanner");
    scan->add_option("--out", out_path, "findings output file (NDJSON), '-' for stdout");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "classify findings with a reasoning backend");
    std::string an_repo, an_findings, an_backend = "heuristic", an_endpoint, an_model, an_out = ".";
    int an_steps = 0, an_workers = 1;
    analyze->add_option("--repo", an_repo, "repository root")->required();
    analyze->add_option("--findings", an_findings, "findings NDJSON file")->required();
    analyze->add_option("--backend", an_backend, "heuristic|remote");
    analyze->add_option("--endpoint", an_endpoint, "remote chat-completions endpoint url");
    analyze->add_option("--model", an_model, "remote model name");
    analyze->add_option("--max-steps", an_steps, "agent step budget");
    analyze->add_option("--workers", an_workers, "worker count");
    analyze->add_option("--out", an_out, "output directory");

    // stats
    auto* stats = app.add_subcommand("stats", "corpus summary over a findings file");
    std::string st_findings, st_format = "json", st_out;
    int st_top = 10;
    stats->add_option("--findings", st_findings, "findings NDJSON file")->required();
    stats->add_option("--top", st_top, "number of top CWEs");
    stats->add_option("--format", st_format, "json|table");
    stats->add_option("--out", st_out, "output file, '-' for stdout");

    // sample
    auto* sample = app.add_subcommand("sample", "prevalence-ranked seeded sampling plan");
    std::string sa_findings, sa_out;
    int sa_k = 50, sa_min = 30, sa_per_flag = 5;
    std::uint64_t sa_seed = 0;
    sample->add_option("--findings", sa_findings, "findings NDJSON file")->required();
    sample->add_option("--k", sa_k, "number of flags to keep");
    sample->add_option("--min-artifacts", sa_min, "minimum distinct artifacts per flag");
    sample->add_option("--per-flag", sa_per_flag, "instances sampled per flag");
    sample->add_option("--seed", sa_seed, "sampling seed");
    sample->add_option("--out", sa_out, "plan output file, '-' for stdout");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score predictions and account cost");
    std::string ev_gold, ev_pred, ev_mode = "binary", ev_traces, ev_format = "json", ev_out;
    double ev_in_price = 2.50, ev_out_price = 10.00;
    long ev_artifacts = 1;
    evaluate->add_option("--gold", ev_gold, "gold annotations NDJSON file");
    evaluate->add_option("--pred", ev_pred, "predicted assessments NDJSON file");
    evaluate->add_option("--mode", ev_mode, "binary|multiclass");
    evaluate->add_option("--traces", ev_traces, "traces NDJSON file for cost accounting");
    evaluate->add_option("--input-price", ev_in_price, "input price per 1M tokens");
    evaluate->add_option("--output-price", ev_out_price, "output price per 1M tokens");
    evaluate->add_option("--artifact-count", ev_artifacts, "artifact count for per-artifact cost");
    evaluate->add_option("--format", ev_format, "json|table");
    evaluate->add_option("--out", ev_out, "output file, '-' for stdout");

    // report
    auto* report = app.add_subcommand("report", "full pipeline: scan, analyze, report");
    std::string rp_repo, rp_artifact = "artifact", rp_rules, rp_backend = "heuristic";
    std::string rp_endpoint, rp_model, rp_out = "artriage-out", rp_format = "markdown";
    std::string rp_findings, rp_assessments;
    std::vector<std::string> rp_semgrep, rp_trivy;
    bool rp_no_builtin = false;
    int rp_steps = 0, rp_workers = 1;
    std::uint64_t rp_seed = 0;
    report->add_option("--repo", rp_repo, "repository root")->required();
    report->add_option("--artifact-id", rp_artifact, "artifact identifier");
    report->add_option("--semgrep-report", rp_semgrep, "semgrep JSON report file(s)");
    report->add_option("--trivy-report", rp_trivy, "trivy JSON report file(s)");
    report->add_option("--rules", rp_rules, "builtin rule file (JSON)");
    report->add_flag("--no-builtin", rp_no_builtin, "skip the builtin pattern scanner");
    report->add_option("--backend", rp_backend, "heuristic|remote");
    report->add_option("--endpoint", rp_endpoint, "remote chat-completions endpoint url");
    report->add_option("--model", rp_model, "remote model name");
    report->add_option("--max-steps", rp_steps, "agent step budget");
    report->add_option("--seed", rp_seed, "run seed");
    report->add_option("--workers", rp_workers, "analysis worker count");
    report->add_option("--out", rp_out, "output directory");
    report->add_option("--format", rp_format, "json|markdown (stdout rendering)");
    report->add_option("--findings", rp_findings, "assemble from an existing findings file");
    report->add_option("--assessments", rp_assessments, "assemble from an existing assessments file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (scan->parsed()) {
            return cmd_scan(repo_path, artifact_id, semgrep_paths, trivy_paths, rules_path,
                            no_builtin, out_path);
        }
        if (analyze->parsed()) {
            return cmd_analyze(an_repo, an_findings, an_backend, an_endpoint, an_model, an_steps,
                               an_workers, an_out);
        }
        if (stats->parsed()) return cmd_stats(st_findings, st_top, st_format, st_out);
        if (sample->parsed()) {
            return cmd_sample(sa_findings, sa_k, sa_min, sa_per_flag, sa_seed, sa_out);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(ev_gold, ev_pred, ev_mode, ev_traces, ev_in_price, ev_out_price,
                                ev_artifacts, ev_format, ev_out);
        }
        if (report->parsed()) {
            return cmd_report(rp_repo, rp_artifact, rp_semgrep, rp_trivy, rp_rules, rp_no_builtin,
                              rp_backend, rp_endpoint, rp_model, rp_steps, rp_seed, rp_workers,
                              rp_out, rp_format, rp_findings, rp_assessments);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
