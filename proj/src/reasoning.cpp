// SPDX-License-Identifier: Apache-2.0
#include "artriage/reasoning.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace artriage {

std::string to_string(BackendKind k) {
    return k == BackendKind::heuristic ? "heuristic" : "remote_model";
}

const std::vector<std::string>& registered_tool_names() {
    static const std::vector<std::string> names = {
        "get_repo_tree",
        "find_important_files",
        "read_file",
        "read_snippet",
        "extract_dependency_files",
        "detect_entrypoints",
        "search_package_usage",
        "search_repo",
        "extract_enclosing_function",
    };
    return names;
}

namespace {

std::string render_snippet(const Snippet& s) {
    std::ostringstream out;
    out << s.file << ":" << s.start_line << "-" << s.end_line << "\n";
    for (size_t i = 0; i < s.lines.size(); ++i) {
        out << "  " << (s.start_line + static_cast<int>(i)) << " | " << s.lines[i] << "\n";
    }
    return out.str();
}

std::string render_hits(const std::vector<SearchHit>& hits, const std::string& empty_note) {
    if (hits.empty()) return empty_note;
    std::ostringstream out;
    for (const auto& h : hits) out << h.file << ":" << h.line << ": " << h.text << "\n";
    return out.str();
}

} // namespace

std::string run_repo_tool(const RepoHandle& repo, const std::string& tool_name,
                          const json& arguments) {
    auto arg_str = [&](const char* key) -> std::string {
        if (!arguments.contains(key) || !arguments.at(key).is_string()) {
            throw std::invalid_argument(std::string("missing string argument '") + key + "'");
        }
        return arguments.at(key).get<std::string>();
    };
    auto arg_int = [&](const char* key, int fallback) -> int {
        if (!arguments.contains(key)) return fallback;
        if (!arguments.at(key).is_number_integer()) {
            throw std::invalid_argument(std::string("argument '") + key + "' must be an integer");
        }
        return arguments.at(key).get<int>();
    };

    try {
        if (tool_name == "get_repo_tree") {
            return get_repo_tree(repo, arg_int("max_depth", 3));
        }
        if (tool_name == "find_important_files") {
            auto files = find_important_files(repo);
            if (files.empty()) return "(no important files detected)";
            std::ostringstream out;
            for (const auto& f : files) out << "[" << f.role << "] " << f.path << "\n";
            return out.str();
        }
        if (tool_name == "read_file") {
            return read_file(repo, arg_str("path"));
        }
        if (tool_name == "read_snippet") {
            return render_snippet(
                read_snippet(repo, arg_str("path"), arg_int("line", 1), arg_int("context", 5)));
        }
        if (tool_name == "extract_dependency_files") {
            auto deps = extract_dependency_files(repo);
            if (deps.specs.empty()) return "(no dependency manifests found)";
            std::ostringstream out;
            for (const auto& d : deps.specs) {
                out << d.manifest << ": " << d.package;
                if (d.version_constraint) out << " " << *d.version_constraint;
                out << "\n";
            }
            return out.str();
        }
        if (tool_name == "detect_entrypoints") {
            auto entries = detect_entrypoints(repo);
            if (entries.empty()) return "(no entry points detected)";
            std::ostringstream out;
            for (const auto& e : entries) {
                out << "[" << to_string(e.kind) << "] " << e.file << ": " << e.evidence << "\n";
            }
            return out.str();
        }
        if (tool_name == "search_package_usage") {
            auto pkg = arg_str("package");
            return render_hits(search_package_usage(repo, pkg),
                               "no usage of '" + pkg + "' found in the repository sources");
        }
        if (tool_name == "search_repo") {
            return render_hits(search_repo(repo, arg_str("query"), arg_int("max_hits", 50)),
                               "no matches");
        }
        if (tool_name == "extract_enclosing_function") {
            auto span = extract_enclosing_function(repo, arg_str("path"), arg_int("line", 1));
            std::ostringstream out;
            out << span.file << ":" << span.start_line << "-" << span.end_line << " "
                << to_string(span.kind) << " " << span.name;
            if (span.approximate) out << " (approximate)";
            return out.str();
        }
    } catch (const NavigationError& e) {
        return std::string("error: ") + e.what();
    } catch (const BinaryFileError& e) {
        return std::string("error: ") + e.what();
    } catch (const PatternError& e) {
        return std::string("error: ") + e.what();
    } catch (const std::invalid_argument& e) {
        return "error: tool '" + tool_name + "': " + e.what();
    } catch (const json::exception& e) {
        return "error: tool '" + tool_name + "': bad arguments: " + e.what();
    }
    throw std::invalid_argument("unregistered tool '" + tool_name + "'");
}

// ---------------------------------------------------------------------------
// Evidence gathering
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& demo_path_vocabulary() {
    static const std::set<std::string> vocab = {"test",     "tests",   "demo",     "example",
                                                "examples", "fixtures", "vendor",  "third_party",
                                                "attack",   "poc"};
    return vocab;
}

std::string to_lower_copy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string basename_of(const std::string& rel) {
    auto pos = rel.find_last_of('/');
    return pos == std::string::npos ? rel : rel.substr(pos + 1);
}

std::vector<std::string> path_segments(const std::string& rel) {
    std::vector<std::string> segs;
    std::string cur;
    for (char c : rel) {
        if (c == '/') {
            segs.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    segs.push_back(cur);
    return segs;
}

std::vector<std::string> collect_demo_markers(const Finding& finding, const RepoHandle& repo) {
    std::vector<std::string> markers;
    auto segs = path_segments(finding.file);
    for (size_t i = 0; i + 1 < segs.size(); ++i) { // directory segments only
        auto low = to_lower_copy(segs[i]);
        if (demo_path_vocabulary().count(low)) {
            markers.push_back("path segment '" + segs[i] + "'");
        }
    }
    // README statements about testing/reproduction on a line that names the
    // flagged file or one of its directories.
    std::vector<std::string> path_tokens;
    if (auto base = to_lower_copy(basename_of(finding.file)); !base.empty()) {
        path_tokens.push_back(base);
    }
    for (size_t i = 0; i + 1 < segs.size(); ++i) path_tokens.push_back(to_lower_copy(segs[i]));
    for (const auto& rel : repo.file_index) {
        if (!to_lower_copy(basename_of(rel)).starts_with("readme")) continue;
        std::string text;
        try {
            text = read_file(repo, rel);
        } catch (const std::exception&) {
            continue;
        }
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            auto ll = to_lower_copy(line);
            bool phrase = ll.find("for testing") != std::string::npos ||
                          ll.find("to reproduce") != std::string::npos ||
                          ll.find("reproducib") != std::string::npos;
            if (!phrase) continue;
            bool near_path = std::any_of(path_tokens.begin(), path_tokens.end(),
                                         [&](const std::string& tok) {
                                             return ll.find(tok) != std::string::npos;
                                         });
            if (near_path) {
                markers.push_back("readme statement: " + line);
                break;
            }
        }
    }
    return markers;
}

bool is_python_file(const std::string& rel) { return rel.ends_with(".py"); }

// File-level import edges, resolved textually against the snapshot index.
std::map<std::string, std::set<std::string>> build_import_edges(const RepoHandle& repo) {
    static const std::regex import_stmt{R"((?:^|\s)import\s+([A-Za-z_][\w.]*))"};
    static const std::regex from_stmt{R"((?:^|\s)from\s+([A-Za-z_][\w.]*)\s+import)"};
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& rel : repo.file_index) {
        if (!is_python_file(rel)) continue;
        std::string text;
        try {
            text = read_file(repo, rel);
        } catch (const std::exception&) {
            continue;
        }
        std::set<std::string> modules;
        for (auto it = std::sregex_iterator(text.begin(), text.end(), import_stmt);
             it != std::sregex_iterator(); ++it) {
            modules.insert((*it)[1].str());
        }
        for (auto it = std::sregex_iterator(text.begin(), text.end(), from_stmt);
             it != std::sregex_iterator(); ++it) {
            modules.insert((*it)[1].str());
        }
        for (const auto& mod : modules) {
            auto dotted = mod;
            std::replace(dotted.begin(), dotted.end(), '.', '/');
            auto last = mod.substr(mod.find_last_of('.') + 1);
            for (const auto& cand : repo.file_index) {
                if (!is_python_file(cand) || cand == rel) continue;
                if (cand == dotted + ".py" || cand.ends_with("/" + dotted + ".py") ||
                    cand == dotted + "/__init__.py" ||
                    cand.ends_with("/" + dotted + "/__init__.py") ||
                    cand == last + ".py" || cand.ends_with("/" + last + ".py")) {
                    edges[rel].insert(cand);
                }
            }
        }
    }
    return edges;
}

// Files the artifact is normally started from.
std::set<std::string> entrypoint_files(const RepoHandle& repo,
                                       const std::vector<EntryPoint>& entries) {
    std::set<std::string> files;
    static const std::regex script_name{R"(([\w./-]+\.(?:py|sh)))"};
    for (const auto& e : entries) {
        if (e.kind == EntryPointKind::main_guard ||
            e.kind == EntryPointKind::script_with_cli_parse) {
            files.insert(e.file);
            continue;
        }
        // Run commands and make targets name scripts textually.
        for (auto it = std::sregex_iterator(e.evidence.begin(), e.evidence.end(), script_name);
             it != std::sregex_iterator(); ++it) {
            auto name = (*it)[1].str();
            for (const auto& rel : repo.file_index) {
                if (rel == name || rel.ends_with("/" + basename_of(name))) files.insert(rel);
            }
        }
    }
    return files;
}

struct ReachResult {
    TriState state;
    std::set<std::string> carriers; // entry files the flagged file is reached from
};

ReachResult python_reachability(const std::string& flagged, const RepoHandle& repo,
                                const std::set<std::string>& entries,
                                const std::map<std::string, std::set<std::string>>& edges) {
    ReachResult r;
    if (entries.count(flagged)) {
        r.state = {TriValue::yes, "the flagged file is itself an entrypoint of the artifact"};
        r.carriers.insert(flagged);
        return r;
    }
    // Breadth-first over import edges, at most two hops from any entrypoint;
    // a textual mention of the flagged file inside an entry script also counts.
    const auto flagged_base = basename_of(flagged);
    for (const auto& entry : entries) {
        std::set<std::string> frontier{entry};
        for (int hop = 1; hop <= 2; ++hop) {
            std::set<std::string> next;
            for (const auto& file : frontier) {
                if (auto it = edges.find(file); it != edges.end()) {
                    next.insert(it->second.begin(), it->second.end());
                }
            }
            if (next.count(flagged)) {
                r.state = {TriValue::yes, "imported within " + std::to_string(hop) +
                                              " hop(s) from entrypoint " + entry};
                r.carriers.insert(entry);
            }
            frontier = std::move(next);
        }
        if (r.state.value == TriValue::yes) break;
        try {
            auto text = read_file(repo, entry);
            if (!flagged_base.empty() && text.find(flagged_base) != std::string::npos &&
                entry != flagged) {
                r.state = {TriValue::yes, "invoked textually from entrypoint " + entry};
                r.carriers.insert(entry);
                break;
            }
        } catch (const std::exception&) {
        }
    }
    if (r.state.value == TriValue::yes) return r;

    // Imported by a non-entry file only: may run in manual/local workflows.
    for (const auto& [src, dsts] : edges) {
        if (dsts.count(flagged)) {
            r.state = {TriValue::uncertain,
                       "imported by " + src + ", which is not on the documented execution path"};
            return r;
        }
    }
    r.state = {TriValue::no, "not imported or invoked by any detected entrypoint or source file"};
    return r;
}

// Lexical channels through which external values enter the program.
std::optional<std::string> find_input_marker(const RepoHandle& repo,
                                             const std::set<std::string>& files) {
    static const std::vector<std::pair<std::regex, std::string>> markers = []() {
        std::vector<std::pair<std::regex, std::string>> v;
        v.emplace_back(std::regex(R"(sys\.argv)"), "command-line arguments (sys.argv)");
        v.emplace_back(std::regex(R"(argparse\.ArgumentParser|ArgumentParser\s*\()"),
                       "command-line arguments (argparse)");
        v.emplace_back(std::regex(R"(@click\.(command|group))"), "command-line arguments (click)");
        v.emplace_back(std::regex(R"((^|[^\w.])input\s*\()"), "interactive input()");
        v.emplace_back(std::regex(R"(os\.environ)"), "environment variables");
        v.emplace_back(std::regex(R"(sys\.stdin)"), "standard input");
        return v;
    }();
    for (const auto& rel : files) {
        std::string text;
        try {
            text = read_file(repo, rel);
        } catch (const std::exception&) {
            continue;
        }
        for (const auto& [re, what] : markers) {
            if (std::regex_search(text, re)) return what + " in " + rel;
        }
    }
    return std::nullopt;
}

std::string cwe_exploit_condition(const Finding& f) {
    auto has_cwe = [&](const char* id) {
        return std::find(f.cwe_ids.begin(), f.cwe_ids.end(), id) != f.cwe_ids.end();
    };
    if (has_cwe("CWE-78")) {
        return "an attacker must control part of the string that is interpolated into the shell "
               "command, and the command must execute during artifact usage";
    }
    if (has_cwe("CWE-502")) {
        return "an attacker must supply the serialized data that the artifact deserializes, e.g. "
               "through shared datasets, checkpoints, or configuration files";
    }
    if (has_cwe("CWE-798")) {
        return "the embedded credential would have to protect a live trust boundary such as a "
               "deployed service or a real signing chain";
    }
    if (has_cwe("CWE-95")) {
        return "an attacker must influence the expression that is evaluated at runtime";
    }
    if (f.category == FindingCategory::dependency_vuln) {
        return "the artifact must execute a code path through the vulnerable package with input "
               "an attacker can influence";
    }
    return "an attacker needs control over the value reaching the flagged code while the code "
           "runs in a context where that value crosses a trust boundary";
}

} // namespace

EvidenceBundle gather_dimensions(const Finding& finding, const RepoHandle& repo) {
    EvidenceBundle e;
    e.research_demo_markers = collect_demo_markers(finding, repo);
    auto& dims = e.dimensions;
    dims.exploitation_condition = cwe_exploit_condition(finding);

    if (finding.category == FindingCategory::dependency_vuln) {
        const std::string pkg = finding.package.value_or("");
        auto hits = pkg.empty() ? std::vector<SearchHit>{} : search_package_usage(repo, pkg);
        e.dependency_usage_hits = static_cast<int>(hits.size());
        const std::string pin = pkg + (finding.version ? "==" + *finding.version : "");
        if (hits.empty()) {
            dims.attacker_controlled_input = {
                TriValue::no, "no import or call of '" + pkg +
                                  "' was found in the repository sources, so no input flows "
                                  "through the vulnerable package"};
            dims.reachability = {TriValue::no,
                                 "repository inspection found no usage of '" + pkg +
                                     "'; the vulnerable code cannot execute when running the "
                                     "artifact as shipped"};
            dims.execution_context = pin + " is listed in " +
                                     (finding.file.empty() ? std::string("a manifest") : finding.file) +
                                     " but is not referenced by the provided source files";
        } else {
            auto entries = detect_entrypoints(repo);
            auto entry_files = entrypoint_files(repo, entries);
            auto edges = build_import_edges(repo);
            TriState reach{TriValue::uncertain,
                           "'" + pkg + "' is used by " + hits.front().file +
                               ", but that file is not on the documented execution path"};
            std::set<std::string> using_files;
            for (const auto& h : hits) using_files.insert(h.file);
            for (const auto& uf : using_files) {
                auto r = python_reachability(uf, repo, entry_files, edges);
                if (r.state.value == TriValue::yes) {
                    reach = {TriValue::yes, "'" + pkg + "' is used by " + uf + " (" +
                                                r.state.note + ")"};
                    break;
                }
            }
            dims.reachability = reach;
            std::set<std::string> scan_files = using_files;
            scan_files.insert(entry_files.begin(), entry_files.end());
            if (auto marker = find_input_marker(repo, scan_files)) {
                dims.attacker_controlled_input = {
                    TriValue::yes, "external values enter via " + *marker +
                                       " and can reach the package's call sites"};
            } else {
                dims.attacker_controlled_input = {
                    TriValue::uncertain,
                    "no explicit input channel was found, but data consumed through '" + pkg +
                        "' could still be attacker-influenced"};
            }
            dims.execution_context =
                pin + " is pinned in " + finding.file + " and used by " + hits.front().file;
        }
        e.reachable_from_entrypoint = dims.reachability;
        return e;
    }

    // Code-level finding (code_issue / config_issue).
    if (!repo.contains(finding.file)) {
        const std::string why = "flagged file '" + finding.file + "' is not present in the snapshot";
        dims.attacker_controlled_input = {TriValue::uncertain, why};
        dims.reachability = {TriValue::uncertain, why};
        dims.execution_context = "unresolvable location: " + why;
        dims.exploitation_condition =
            "cannot be established from the snapshot; " + why;
        e.reachable_from_entrypoint = dims.reachability;
        return e;
    }

    auto entries = detect_entrypoints(repo);
    auto entry_files = entrypoint_files(repo, entries);

    if (is_python_file(finding.file)) {
        auto edges = build_import_edges(repo);
        auto reach = python_reachability(finding.file, repo, entry_files, edges);
        dims.reachability = reach.state;

        FunctionSpan span;
        try {
            span = extract_enclosing_function(repo, finding.file, finding.line.value_or(1));
        } catch (const std::exception&) {
            span = FunctionSpan{finding.file, "<module-level>", 1, 1, SpanKind::module, true};
        }
        dims.execution_context =
            "flagged line sits in " + to_string(span.kind) +
            (span.kind == SpanKind::module ? std::string(" scope") : " " + span.name) + " of " +
            finding.file +
            (reach.state.value == TriValue::yes ? ", which runs during normal artifact execution"
                                                : "");

        if (reach.state.value == TriValue::no) {
            dims.attacker_controlled_input = {
                TriValue::no, "the flagged code is never executed, so no externally controlled "
                              "value reaches it"};
        } else {
            std::set<std::string> scan_files = reach.carriers;
            scan_files.insert(finding.file);
            if (auto marker = find_input_marker(repo, scan_files)) {
                dims.attacker_controlled_input = {
                    TriValue::yes,
                    "external values enter via " + *marker + " and flow toward the flagged code"};
            } else {
                dims.attacker_controlled_input = {
                    TriValue::uncertain,
                    "no explicit input channel was found; attacker influence through data or "
                    "configuration files cannot be ruled out"};
            }
        }
    } else {
        // Non-executable asset (certificate, key, config, data file).
        dims.attacker_controlled_input = {
            TriValue::no, "the flagged content is a static bundled file and does not derive "
                          "from program input"};
        std::string referenced_by;
        const auto base = basename_of(finding.file);
        const auto dir = finding.file.find('/') != std::string::npos
                             ? finding.file.substr(0, finding.file.find_last_of('/'))
                             : std::string{};
        for (const auto& rel : repo.file_index) {
            if (rel == finding.file) continue;
            try {
                auto text = read_file(repo, rel);
                if (text.find(base) != std::string::npos ||
                    (!dir.empty() && text.find(dir) != std::string::npos)) {
                    referenced_by = rel;
                    break;
                }
            } catch (const std::exception&) {
                continue;
            }
        }
        if (!referenced_by.empty()) {
            dims.reachability = {TriValue::uncertain,
                                 "the file may be used by local tooling (referenced from " +
                                     referenced_by +
                                     "); no evidence it participates in normal artifact "
                                     "execution"};
            dims.execution_context = finding.file + " is a bundled asset referenced by " +
                                     referenced_by;
        } else {
            dims.reachability = {TriValue::no,
                                 "no source file or script references this bundled asset"};
            dims.execution_context = finding.file + " is a bundled asset not referenced by any "
                                     "source file";
        }
        if (!e.research_demo_markers.empty()) {
            dims.execution_context += " under a research/test path";
        }
    }
    e.reachable_from_entrypoint = dims.reachability;
    return e;
}

SecurityLabel heuristic_decide(const EvidenceBundle& e, const Finding& finding) {
    const TriValue attacker = e.dimensions.attacker_controlled_input.value;
    const TriValue reach = e.dimensions.reachability.value;
    const bool dependency = finding.category == FindingCategory::dependency_vuln;

    // (1) False-positive elimination first.
    if (dependency && e.dependency_usage_hits == 0) return SecurityLabel::false_positive;
    if (!dependency && reach == TriValue::no) return SecurityLabel::false_positive;

    // (2) Intentional research/demo content without a live trust boundary.
    if (!e.research_demo_markers.empty() && attacker != TriValue::yes) {
        return SecurityLabel::benign_research_usage;
    }

    // (3) Practically exploitable path.
    const bool attacker_open = attacker == TriValue::yes || attacker == TriValue::uncertain;
    const bool reach_open = reach == TriValue::yes || reach == TriValue::uncertain;
    if (attacker_open && reach_open && (attacker == TriValue::yes || reach == TriValue::yes)) {
        return SecurityLabel::contextual_risk;
    }

    // (4) Unsafe practice without an established exploit path.
    return SecurityLabel::hardening_recommendation;
}

namespace {

std::string describe_purpose(const Finding& f, const RepoHandle& repo) {
    if (f.category == FindingCategory::dependency_vuln) {
        std::string pin = f.package.value_or("the package") +
                          (f.version ? "==" + *f.version : "");
        return "Declares dependency " + pin + " in " +
               (f.file.empty() ? std::string("a manifest") : f.file) + ".";
    }
    if (!repo.contains(f.file)) {
        return "Flagged location " + f.file + " (not present in the snapshot).";
    }
    if (!is_python_file(f.file)) {
        return "Bundled asset file " + f.file + "; flagged content: " + f.message + ".";
    }
    FunctionSpan span;
    try {
        span = extract_enclosing_function(repo, f.file, f.line.value_or(1));
    } catch (const std::exception&) {
        return f.file + ": " + f.message + ".";
    }
    if (span.kind == SpanKind::module) {
        return "Module-level code in " + f.file + "; flagged pattern: " + f.message + ".";
    }
    return "Implements " + span.name + " in " + f.file + "; flagged pattern: " + f.message + ".";
}

std::string build_evidence(const Finding& f, const RepoHandle& repo, const EvidenceBundle& e) {
    if (f.category == FindingCategory::dependency_vuln) {
        std::string pin = f.package.value_or("?") + (f.version ? "==" + *f.version : "");
        if (e.dependency_usage_hits == 0) {
            return f.file + " pins " + pin + "; package-usage search over the sources returned "
                   "no import or call of the package";
        }
        return f.file + " pins " + pin + "; package-usage search returned " +
               std::to_string(e.dependency_usage_hits) + " hit(s)";
    }
    try {
        auto snippet = read_snippet(repo, f.file, f.line.value_or(1), 1);
        std::string out = f.file + ":" + std::to_string(snippet.start_line) + "-" +
                          std::to_string(snippet.end_line) + ": ";
        for (size_t i = 0; i < snippet.lines.size(); ++i) {
            if (i) out += " / ";
            auto line = snippet.lines[i];
            auto first = line.find_first_not_of(" \t");
            out += first == std::string::npos ? line : line.substr(first);
        }
        return out;
    } catch (const std::exception&) {
        return "location " + f.file +
               (f.line ? ":" + std::to_string(*f.line) : std::string{}) +
               " could not be read from the snapshot";
    }
}

std::string join_markers(const std::vector<std::string>& markers) {
    std::string out;
    for (size_t i = 0; i < markers.size(); ++i) {
        if (i) out += "; ";
        out += markers[i];
    }
    return out;
}

std::string build_reasoning(SecurityLabel label, const EvidenceBundle& e, const Finding& f) {
    const auto& att = e.dimensions.attacker_controlled_input;
    const auto& reach = e.dimensions.reachability;
    switch (label) {
        case SecurityLabel::false_positive:
            if (f.category == FindingCategory::dependency_vuln) {
                return "The reported vulnerability requires a reachable code path through the "
                       "affected package, but " + reach.note +
                       "; the finding has no practical effect in this artifact.";
            }
            return "The flagged code is not reachable during normal artifact execution (" +
                   reach.note + "), so the reported pattern cannot manifest in context.";
        case SecurityLabel::benign_research_usage:
            return "The flagged content is intentional research material (" +
                   join_markers(e.research_demo_markers) +
                   ") and is required to demonstrate or reproduce the artifact's method; no "
                   "live trust boundary depends on it (" + att.note + ").";
        case SecurityLabel::contextual_risk:
            return "Attacker-controlled input is plausible (" + att.note +
                   ") and the flagged code executes in artifact usage (" + reach.note +
                   "); together these satisfy the conditions for practical exploitability.";
        case SecurityLabel::hardening_recommendation:
            return "The flagged pattern is unsafe practice, but current evidence does not "
                   "establish a practically exploitable path (attacker input: " +
                   to_string(att.value) + "; reachability: " + to_string(reach.value) +
                   "); it should still be improved before the code is reused or extended.";
    }
    return "";
}

std::string build_recommendation(SecurityLabel label, const Finding& f) {
    auto has_cwe = [&](const char* id) {
        return std::find(f.cwe_ids.begin(), f.cwe_ids.end(), id) != f.cwe_ids.end();
    };
    if (f.category == FindingCategory::dependency_vuln) {
        if (label == SecurityLabel::false_positive) {
            return "No artifact-level fix is required to run the artifact. Remove the unused "
                   "dependency from " + f.file + ", or upgrade it before any future code starts "
                   "using it.";
        }
        return "Upgrade " + f.package.value_or("the package") +
               " to a release without the reported vulnerability and re-run the dependency scan.";
    }
    if (has_cwe("CWE-78")) {
        return "Invoke the external program with shell=False and pass arguments as a list so "
               "the shell never interprets external values; strictly validate or allow-list the "
               "interpolated input.";
    }
    if (has_cwe("CWE-502")) {
        return "Deserialize only data the artifact produced itself; switch to safe loaders "
               "(yaml.safe_load, json) for anything a user can supply.";
    }
    if (has_cwe("CWE-798")) {
        if (label == SecurityLabel::benign_research_usage) {
            return "No immediate artifact-level action is required; keep the key clearly "
                   "documented as a non-production test asset and never reuse it behind a live "
                   "service.";
        }
        return "Remove the embedded credential from the repository and load secrets from the "
               "environment or an untracked local file.";
    }
    if (has_cwe("CWE-95")) {
        return "Avoid eval/exec over runtime-built strings; parse structured input explicitly "
               "(ast.literal_eval or a schema-checked parser).";
    }
    return "Review the flagged pattern and add validation or a safer alternative before the "
           "code is reused outside its research setting.";
}

} // namespace

Assessment heuristic_assess(const Finding& finding, const RepoHandle& repo) {
    auto evidence = gather_dimensions(finding, repo);
    auto label = heuristic_decide(evidence, finding);
    Assessment a;
    a.security_label = label;
    a.code_purpose = describe_purpose(finding, repo);
    a.execution_context = evidence.dimensions.execution_context;
    a.required_conditions_for_exploit = evidence.dimensions.exploitation_condition;
    a.input_controlled_by_attacker = evidence.dimensions.attacker_controlled_input.render();
    a.reachable_in_artifact_execution = evidence.dimensions.reachability.render();
    a.evidence_snippet = build_evidence(finding, repo, evidence);
    a.reasoning = build_reasoning(label, evidence, finding);
    a.recommendation = build_recommendation(label, finding);
    return a;
}

StepResult HeuristicBackend::step(const SessionState& state, const std::string&) {
    AgentAction action;
    action.kind = AgentAction::Kind::final_answer;
    action.answer = heuristic_assess(state.finding, *repo_);
    action.rationale = "deterministic rule evaluation over gathered evidence";
    return {std::move(action), 0, 0};
}

StepResult ScriptedBackend::step(const SessionState&, const std::string&) {
    if (next_ >= transcript_.size()) {
        throw ProtocolError("scripted transcript exhausted before a final answer");
    }
    StepResult r;
    r.action = transcript_[next_];
    if (next_ < tokens_.size()) {
        r.input_tokens = tokens_[next_].first;
        r.output_tokens = tokens_[next_].second;
    }
    ++next_;
    return r;
}

std::string initial_finding_context(const Finding& finding, const RepoHandle& repo) {
    std::ostringstream out;
    out << "finding:\n";
    out << "  artifact_id: " << finding.artifact_id << "\n";
    out << "  tool: " << to_string(finding.tool) << "\n";
    out << "  finding_id: " << finding.finding_id << "\n";
    out << "  category: " << to_string(finding.category) << "\n";
    out << "  severity: " << to_string(finding.severity) << "\n";
    out << "  file: " << finding.file << "\n";
    if (finding.line) out << "  line: " << *finding.line << "\n";
    out << "  message: " << finding.message << "\n";
    if (finding.package) out << "  package: " << *finding.package << "\n";
    if (finding.version) out << "  version: " << *finding.version << "\n";
    if (!finding.cwe_ids.empty()) {
        out << "  cwe_ids:";
        for (const auto& c : finding.cwe_ids) out << " " << c;
        out << "\n";
    }
    if (!finding.cve_ids.empty()) {
        out << "  cve_ids:";
        for (const auto& c : finding.cve_ids) out << " " << c;
        out << "\n";
    }
    if (finding.cvss) out << "  cvss: " << *finding.cvss << "\n";
    out << "initial snippet:\n";
    try {
        out << render_snippet(read_snippet(repo, finding.file, finding.line.value_or(1), 5));
    } catch (const std::exception&) {
        out << "  (location not resolvable in the snapshot)\n";
    }
    return out.str();
}

namespace {

std::string truncate_observation(std::string obs, int cap) {
    if (cap <= 0 || static_cast<int>(obs.size()) <= cap) return obs;
    obs.resize(static_cast<size_t>(cap));
    obs += "\n[observation truncated at " + std::to_string(cap) + " chars]";
    return obs;
}

} // namespace

AnalysisResult analyze_finding(const Finding& finding, const RepoHandle& repo, Backend& backend,
                               const Budget& budget) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    AgentTrace trace;
    trace.finding_ref = make_ref(finding);
    trace.backend = backend.kind();

    SessionState state;
    state.finding = finding;
    state.initial_context = initial_finding_context(finding, repo);
    state.history = &trace.steps;

    std::string observation = state.initial_context;
    bool reprompted = false;
    const auto& registry = registered_tool_names();

    for (int step = 0; step < budget.max_steps; ++step) {
        if (elapsed() > budget.timeout_seconds) {
            trace.wall_seconds = elapsed();
            throw BudgetExceededError("analysis timed out after " +
                                          std::to_string(budget.timeout_seconds) + "s",
                                      std::move(trace));
        }
        state.step_index = step;
        StepResult result = backend.step(state, observation);
        trace.input_tokens += result.input_tokens;
        trace.output_tokens += result.output_tokens;
        AgentAction& action = result.action;

        if (action.kind == AgentAction::Kind::tool_call) {
            const bool known =
                std::find(registry.begin(), registry.end(), action.tool_name) != registry.end();
            if (!known) {
                if (reprompted) {
                    trace.wall_seconds = elapsed();
                    throw ProtocolError("backend requested unknown tool '" + action.tool_name +
                                        "' after a corrective reprompt");
                }
                reprompted = true;
                observation = "error: unknown tool '" + action.tool_name +
                              "'. Available tools: " + [&] {
                                  std::string s;
                                  for (const auto& n : registry) s += n + " ";
                                  return s;
                              }();
                continue;
            }
            observation = truncate_observation(run_repo_tool(repo, action.tool_name,
                                                             action.arguments),
                                               budget.max_observation_chars);
            trace.steps.push_back({std::move(action), observation});
            continue;
        }

        // Final answer.
        if (!action.answer) {
            if (reprompted) {
                trace.wall_seconds = elapsed();
                throw ProtocolError("backend returned an empty final answer after a corrective "
                                    "reprompt");
            }
            reprompted = true;
            observation = "error: final answer missing the assessment object; reply with the "
                          "full nine-field assessment";
            continue;
        }
        auto validation = validate_assessment(*action.answer);
        if (!validation.ok()) {
            if (reprompted) {
                trace.wall_seconds = elapsed();
                std::string msg = "backend final answer violates the assessment schema:";
                for (const auto& e : validation.errors) msg += " [" + e + "]";
                throw ProtocolError(msg);
            }
            reprompted = true;
            observation = "error: final answer rejected:";
            for (const auto& e : validation.errors) observation += " [" + e + "]";
            observation += "; reply with a corrected final answer";
            continue;
        }

        Assessment answer = *action.answer;
        trace.steps.push_back({std::move(action), ""});
        trace.wall_seconds = elapsed();
        return {std::move(answer), std::move(trace)};
    }

    trace.wall_seconds = elapsed();
    throw BudgetExceededError("no final answer within " + std::to_string(budget.max_steps) +
                                  " step(s)",
                              std::move(trace));
}

} // namespace artriage
