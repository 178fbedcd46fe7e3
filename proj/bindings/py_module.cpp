// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "artriage/corpus_stats.hpp"
#include "artriage/evaluation.hpp"
#include "artriage/ingest.hpp"
#include "artriage/pipeline.hpp"
#include "artriage/reasoning.hpp"

namespace py = pybind11;
using namespace artriage;

namespace {

std::vector<PredictedLabel> labels_by_index(const std::vector<std::string>& labels,
                                            std::vector<std::string>* bad) {
    std::vector<PredictedLabel> out;
    for (size_t i = 0; i < labels.size(); ++i) {
        auto label = parse_security_label(labels[i]);
        if (!label) {
            bad->push_back(labels[i]);
            continue;
        }
        PredictedLabel p;
        p.ref.artifact_id = "a";
        p.ref.tool = Tool::builtin;
        p.ref.finding_id = "finding-" + std::to_string(i);
        p.label = *label;
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "context-aware security triage for research code repositories";
    m.attr("__version__") = "0.1.0";

    py::enum_<Tool>(m, "Tool")
        .value("semgrep", Tool::semgrep)
        .value("trivy", Tool::trivy)
        .value("builtin", Tool::builtin);
    py::enum_<FindingCategory>(m, "FindingCategory")
        .value("code_issue", FindingCategory::code_issue)
        .value("dependency_vuln", FindingCategory::dependency_vuln)
        .value("config_issue", FindingCategory::config_issue);
    py::enum_<Severity>(m, "Severity")
        .value("low", Severity::low)
        .value("medium", Severity::medium)
        .value("high", Severity::high)
        .value("critical", Severity::critical)
        .value("unknown", Severity::unknown);
    py::enum_<SecurityLabel>(m, "SecurityLabel")
        .value("CONTEXTUAL_RISK", SecurityLabel::contextual_risk)
        .value("HARDENING_RECOMMENDATION", SecurityLabel::hardening_recommendation)
        .value("BENIGN_RESEARCH_USAGE", SecurityLabel::benign_research_usage)
        .value("FALSE_POSITIVE", SecurityLabel::false_positive);
    py::enum_<LabelCategory>(m, "LabelCategory")
        .value("security_relevant", LabelCategory::security_relevant)
        .value("non_security", LabelCategory::non_security);
    py::enum_<TriValue>(m, "TriValue")
        .value("yes", TriValue::yes)
        .value("no", TriValue::no)
        .value("uncertain", TriValue::uncertain);

    py::class_<Finding>(m, "Finding")
        .def(py::init<>())
        .def_readwrite("artifact_id", &Finding::artifact_id)
        .def_readwrite("tool", &Finding::tool)
        .def_readwrite("finding_id", &Finding::finding_id)
        .def_readwrite("category", &Finding::category)
        .def_readwrite("severity", &Finding::severity)
        .def_readwrite("file", &Finding::file)
        .def_readwrite("line", &Finding::line)
        .def_readwrite("message", &Finding::message)
        .def_readwrite("package", &Finding::package)
        .def_readwrite("version", &Finding::version)
        .def_readwrite("cwe_ids", &Finding::cwe_ids)
        .def_readwrite("cve_ids", &Finding::cve_ids)
        .def_readwrite("cvss", &Finding::cvss)
        .def("to_json", [](const Finding& f) { return finding_to_json(f).dump(); })
        .def("__repr__", [](const Finding& f) {
            return "<Finding " + to_string(f.tool) + ":" + f.finding_id + " " + f.file + ">";
        });

    py::class_<FlagKey>(m, "FlagKey")
        .def_readonly("tool", &FlagKey::tool)
        .def_readonly("finding_id", &FlagKey::finding_id)
        .def("render", &FlagKey::render)
        .def("__eq__", [](const FlagKey& a, const FlagKey& b) { return a == b; })
        .def("__hash__", [](const FlagKey& k) { return py::hash(py::str(k.render())); })
        .def("__repr__", [](const FlagKey& k) { return "<FlagKey " + k.render() + ">"; });

    py::class_<Assessment>(m, "Assessment")
        .def(py::init<>())
        .def_readwrite("security_label", &Assessment::security_label)
        .def_readwrite("code_purpose", &Assessment::code_purpose)
        .def_readwrite("execution_context", &Assessment::execution_context)
        .def_readwrite("required_conditions_for_exploit",
                       &Assessment::required_conditions_for_exploit)
        .def_readwrite("input_controlled_by_attacker", &Assessment::input_controlled_by_attacker)
        .def_readwrite("reachable_in_artifact_execution",
                       &Assessment::reachable_in_artifact_execution)
        .def_readwrite("evidence_snippet", &Assessment::evidence_snippet)
        .def_readwrite("reasoning", &Assessment::reasoning)
        .def_readwrite("recommendation", &Assessment::recommendation)
        .def("__eq__", [](const Assessment& a, const Assessment& b) { return a == b; });

    py::class_<RepoHandle>(m, "RepoHandle")
        .def_static("open", [](const std::string& root) { return RepoHandle::open(root); })
        .def_readonly("file_index", &RepoHandle::file_index)
        .def_property_readonly("root",
                               [](const RepoHandle& r) { return r.root.string(); });

    py::class_<Snippet>(m, "Snippet")
        .def_readonly("file", &Snippet::file)
        .def_readonly("start_line", &Snippet::start_line)
        .def_readonly("end_line", &Snippet::end_line)
        .def_readonly("lines", &Snippet::lines);

    py::class_<FunctionSpan>(m, "FunctionSpan")
        .def_readonly("file", &FunctionSpan::file)
        .def_readonly("name", &FunctionSpan::name)
        .def_readonly("start_line", &FunctionSpan::start_line)
        .def_readonly("end_line", &FunctionSpan::end_line)
        .def_readonly("approximate", &FunctionSpan::approximate)
        .def_property_readonly("kind",
                               [](const FunctionSpan& s) { return to_string(s.kind); });

    py::class_<SearchHit>(m, "SearchHit")
        .def_readonly("file", &SearchHit::file)
        .def_readonly("line", &SearchHit::line)
        .def_readonly("text", &SearchHit::text);

    py::class_<EntryPoint>(m, "EntryPoint")
        .def_readonly("file", &EntryPoint::file)
        .def_readonly("evidence", &EntryPoint::evidence)
        .def_property_readonly("kind", [](const EntryPoint& e) { return to_string(e.kind); });

    py::class_<DependencySpec>(m, "DependencySpec")
        .def_readonly("manifest", &DependencySpec::manifest)
        .def_readonly("package", &DependencySpec::package)
        .def_readonly("version_constraint", &DependencySpec::version_constraint);

    // core model operations
    m.def("label_category", &label_category);
    m.def("validate_assessment",
          [](const Assessment& a) { return validate_assessment(a).errors; });
    m.def("serialize_assessment", &serialize_assessment);
    m.def("parse_assessment", &parse_assessment);
    m.def("flag_key", &flag_key);
    m.def("read_findings_ndjson", &read_findings_ndjson);
    m.def("write_findings_ndjson", &write_findings_ndjson);

    // repository tools
    m.def("get_repo_tree", &get_repo_tree, py::arg("repo"), py::arg("max_depth") = 3);
    m.def("find_important_files", [](const RepoHandle& repo) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& f : find_important_files(repo)) out.emplace_back(f.path, f.role);
        return out;
    });
    m.def("read_file", &read_file);
    m.def("read_snippet", &read_snippet, py::arg("repo"), py::arg("path"), py::arg("line"),
          py::arg("context") = 5);
    m.def("extract_dependency_files",
          [](const RepoHandle& repo) { return extract_dependency_files(repo).specs; });
    m.def("detect_entrypoints", &detect_entrypoints);
    m.def("search_package_usage", &search_package_usage);
    m.def("search_repo", &search_repo, py::arg("repo"), py::arg("query"),
          py::arg("max_hits") = 50);
    m.def("extract_enclosing_function", &extract_enclosing_function);

    // scanning and analysis
    m.def(
        "builtin_scan",
        [](const RepoHandle& repo, const std::string& artifact_id,
           const std::optional<std::string>& rules_path) {
            auto rules = rules_path ? load_builtin_rules(*rules_path) : default_builtin_rules();
            return builtin_scan(repo, rules, artifact_id).findings;
        },
        py::arg("repo"), py::arg("artifact_id"), py::arg("rules_path") = std::nullopt);
    m.def("ingest_semgrep_file",
          [](const std::string& path, const std::string& artifact_id) {
              return ingest_semgrep_report(load_scanner_report(Tool::semgrep, path), artifact_id)
                  .findings;
          });
    m.def("ingest_trivy_file", [](const std::string& path, const std::string& artifact_id) {
        return ingest_trivy_report(load_scanner_report(Tool::trivy, path), artifact_id).findings;
    });
    m.def("heuristic_assess", &heuristic_assess);
    m.def(
        "analyze_finding",
        [](const Finding& finding, const RepoHandle& repo, int max_steps) {
            HeuristicBackend backend(repo);
            Budget budget;
            budget.max_steps = max_steps;
            auto result = analyze_finding(finding, repo, backend, budget);
            return py::make_tuple(result.assessment, trace_to_json(result.trace).dump());
        },
        py::arg("finding"), py::arg("repo"), py::arg("max_steps") = 20);

    // corpus statistics and sampling
    m.def("compute_summary_json", [](const std::vector<Finding>& findings, size_t top_k) {
        return summary_to_json(compute_summary(merge_and_index({findings}), top_k)).dump();
    }, py::arg("findings"), py::arg("top_k") = 10);
    m.def("select_prevalent_flags",
          [](const std::vector<Finding>& findings, int k, int min_artifacts) {
              return select_prevalent_flags(merge_and_index({findings}), k, min_artifacts);
          });
    m.def("sample_findings_json",
          [](const std::vector<Finding>& findings, int k, int min_artifacts, int n_per_flag,
             std::uint64_t seed) {
              auto set = merge_and_index({findings});
              auto flags = select_prevalent_flags(set, k, min_artifacts);
              auto plan = sample_findings(set, flags, n_per_flag, seed);
              plan.k = k;
              plan.min_artifacts = min_artifacts;
              return plan_to_json(plan).dump();
          });

    // evaluation
    m.def("metrics_json", [](const std::vector<std::string>& gold,
                             const std::vector<std::string>& pred, const std::string& mode) {
        if (gold.size() != pred.size()) {
            throw std::invalid_argument("gold and pred must have equal length");
        }
        std::vector<std::string> bad;
        auto pred_labels = labels_by_index(pred, &bad);
        auto gold_pred = labels_by_index(gold, &bad);
        if (!bad.empty()) throw std::invalid_argument("unknown label '" + bad.front() + "'");
        std::vector<GoldAnnotation> gold_rows;
        for (size_t i = 0; i < gold_pred.size(); ++i) {
            gold_rows.push_back({gold_pred[i].ref, gold_pred[i].label, ""});
        }
        auto report = mode == "multiclass" ? multiclass_metrics(gold_rows, pred_labels)
                                           : binary_metrics(gold_rows, pred_labels);
        return metrics_to_json(report).dump();
    });
    m.def(
        "cost_summary_json",
        [](const std::vector<std::tuple<long, long, double>>& traces, double input_price,
           double output_price, long artifact_count) {
            std::vector<AgentTrace> ts;
            for (const auto& [in, out, secs] : traces) {
                AgentTrace t;
                t.input_tokens = in;
                t.output_tokens = out;
                t.wall_seconds = secs;
                ts.push_back(std::move(t));
            }
            return cost_to_json(
                       cost_summary(ts, PriceConfig{input_price, output_price}, artifact_count))
                .dump();
        },
        py::arg("traces"), py::arg("input_price") = 2.50, py::arg("output_price") = 10.00,
        py::arg("artifact_count") = 1);

    // full pipeline
    m.def(
        "run_pipeline_json",
        [](const std::string& repo_path, const std::string& artifact_id,
           const std::string& out_dir, const std::vector<std::string>& semgrep_reports,
           const std::vector<std::string>& trivy_reports, int workers) {
            RunConfig config;
            config.repo_path = repo_path;
            config.artifact_id = artifact_id;
            config.output_dir = out_dir;
            for (const auto& p : semgrep_reports) config.semgrep_reports.emplace_back(p);
            for (const auto& p : trivy_reports) config.trivy_reports.emplace_back(p);
            config.worker_count = workers;
            return report_to_json(run_pipeline(config)).dump();
        },
        py::arg("repo_path"), py::arg("artifact_id"), py::arg("out_dir"),
        py::arg("semgrep_reports") = std::vector<std::string>{},
        py::arg("trivy_reports") = std::vector<std::string>{}, py::arg("workers") = 1);
}
