// SPDX-License-Identifier: Apache-2.0
#include "artriage/repo_context.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace artriage {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Translate a glob ('*' within a segment, '**' across segments, '?') to regex.
std::regex glob_to_regex(std::string_view pattern) {
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
    return std::regex(re);
}

bool glob_match(std::string_view pattern, std::string_view text) {
    return std::regex_match(std::string(text), glob_to_regex(pattern));
}

std::vector<std::string> split_segments(const std::string& rel) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : rel) {
        if (c == '/') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool ignored(const std::string& rel, const std::vector<std::string>& rules) {
    for (const auto& rule : rules) {
        if (rule.find('/') != std::string::npos) {
            if (glob_match(rule, rel)) return true;
            continue;
        }
        for (const auto& seg : split_segments(rel)) {
            if (glob_match(rule, seg)) return true;
        }
    }
    return false;
}

bool sniff_binary(const fs::path& abs) {
    std::ifstream in(abs, std::ios::binary);
    char buf[8192];
    in.read(buf, sizeof(buf));
    const auto n = in.gcount();
    return std::find(buf, buf + n, '\0') != buf + n;
}

std::vector<std::string> read_lines(const fs::path& abs) {
    std::ifstream in(abs, std::ios::binary);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::string basename_lower(const std::string& rel) {
    auto pos = rel.find_last_of('/');
    return to_lower(pos == std::string::npos ? rel : rel.substr(pos + 1));
}

bool is_python_file(const std::string& rel) { return rel.size() > 3 && rel.ends_with(".py"); }

bool is_readme(const std::string& rel) { return basename_lower(rel).starts_with("readme"); }

} // namespace

std::vector<std::string> RepoHandle::default_ignores() {
    return {".git", ".hg", ".svn", "__pycache__", ".mypy_cache", ".pytest_cache",
            ".tox", ".venv", "node_modules", "*.pyc"};
}

RepoHandle RepoHandle::open(const fs::path& root, std::vector<std::string> ignore_rules) {
    std::error_code ec;
    auto abs_root = fs::absolute(root, ec);
    if (ec || !fs::is_directory(abs_root)) {
        throw NavigationError("repository root is not a readable directory: " + root.string());
    }
    RepoHandle repo;
    repo.root = fs::canonical(abs_root);
    repo.ignore_rules = std::move(ignore_rules);

    fs::recursive_directory_iterator it(repo.root, fs::directory_options::skip_permission_denied);
    for (const auto& entry : it) {
        // Symlinks are invisible: neither indexed nor descended into.
        if (entry.is_symlink()) {
            if (entry.is_directory()) it.disable_recursion_pending();
            continue;
        }
        auto rel = fs::relative(entry.path(), repo.root).generic_string();
        if (entry.is_directory()) {
            if (ignored(rel, repo.ignore_rules)) it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file()) continue;
        if (ignored(rel, repo.ignore_rules)) continue;
        repo.file_index.push_back(rel);
    }
    std::sort(repo.file_index.begin(), repo.file_index.end());
    return repo;
}

bool RepoHandle::contains(const std::string& rel_path) const {
    return std::binary_search(file_index.begin(), file_index.end(), rel_path);
}

fs::path RepoHandle::resolve(const std::string& rel_path) const {
    if (rel_path.empty()) throw NavigationError("empty path");
    if (rel_path.front() == '/' || (rel_path.size() > 1 && rel_path[1] == ':')) {
        throw NavigationError("absolute paths are not allowed: " + rel_path);
    }
    for (const auto& seg : split_segments(rel_path)) {
        if (seg.empty() || seg == "." || seg == "..") {
            throw NavigationError("path escapes or is not normalized: " + rel_path);
        }
    }
    if (!contains(rel_path)) {
        throw NavigationError("path not in repository snapshot: " + rel_path);
    }
    auto abs = root / fs::path(rel_path);
    std::error_code ec;
    auto canon = fs::weakly_canonical(abs, ec);
    if (ec) throw NavigationError("cannot resolve path: " + rel_path);
    auto root_str = root.generic_string();
    auto canon_str = canon.generic_string();
    if (canon_str != root_str && !canon_str.starts_with(root_str + "/")) {
        throw NavigationError("path resolves outside the repository: " + rel_path);
    }
    return canon;
}

std::string to_string(EntryPointKind k) {
    switch (k) {
        case EntryPointKind::main_guard: return "main_guard";
        case EntryPointKind::script_with_cli_parse: return "script_with_cli_parse";
        case EntryPointKind::makefile_target: return "makefile_target";
        case EntryPointKind::documented_run_command: return "documented_run_command";
    }
    return "main_guard";
}

std::string to_string(SpanKind k) {
    switch (k) {
        case SpanKind::function: return "function";
        case SpanKind::method: return "method";
        case SpanKind::class_def: return "class";
        case SpanKind::module: return "module";
    }
    return "module";
}

std::string get_repo_tree(const RepoHandle& repo, int max_depth) {
    std::ostringstream out;
    out << "./\n";
    if (max_depth <= 0) return out.str();

    // Children of each directory, directories first, both alphabetical.
    std::map<std::string, std::set<std::string>> dirs;  // parent -> dir names
    std::map<std::string, std::set<std::string>> files; // parent -> file names
    for (const auto& rel : repo.file_index) {
        auto segs = split_segments(rel);
        std::string parent;
        for (size_t i = 0; i + 1 < segs.size(); ++i) {
            dirs[parent].insert(segs[i]);
            parent = parent.empty() ? segs[i] : parent + "/" + segs[i];
        }
        files[parent].insert(segs.back());
    }

    auto render = [&](auto&& self, const std::string& dir, int depth) -> void {
        if (depth > max_depth) return;
        std::string indent(static_cast<size_t>(depth) * 2, ' ');
        if (auto it = dirs.find(dir); it != dirs.end()) {
            for (const auto& name : it->second) {
                out << indent << name << "/\n";
                self(self, dir.empty() ? name : dir + "/" + name, depth + 1);
            }
        }
        if (auto it = files.find(dir); it != files.end()) {
            for (const auto& name : it->second) out << indent << name << "\n";
        }
    };
    render(render, "", 1);
    return out.str();
}

std::vector<ImportantFile> find_important_files(const RepoHandle& repo) {
    std::vector<ImportantFile> out;
    for (const auto& rel : repo.file_index) {
        auto base = basename_lower(rel);
        std::string role;
        if (base.starts_with("readme")) {
            role = "readme";
        } else if (base.starts_with("license") || base.starts_with("copying")) {
            role = "license";
        } else if ((base.starts_with("requirements") && base.ends_with(".txt")) ||
                   base == "pyproject.toml" || base == "setup.py" || base == "setup.cfg" ||
                   base == "pipfile" || base == "environment.yml" || base == "environment.yaml" ||
                   base == "package.json" || base == "cargo.toml" || base == "go.mod" ||
                   base == "pom.xml") {
            role = "dependency_manifest";
        } else if (base.starts_with("dockerfile") || base == "containerfile" ||
                   base.ends_with(".dockerfile") || base.starts_with("docker-compose")) {
            role = "container_build";
        } else if (base == "makefile" || base == "gnumakefile" || base == "cmakelists.txt" ||
                   base == "justfile" || base == "meson.build" || base == "build.sh") {
            role = "build_script";
        }
        if (!role.empty()) out.push_back({rel, role});
    }
    return out;
}

std::string read_file(const RepoHandle& repo, const std::string& path) {
    auto abs = repo.resolve(path);
    if (sniff_binary(abs)) throw BinaryFileError("binary content: " + path);
    std::ifstream in(abs, std::ios::binary);
    if (!in) throw NavigationError("cannot open file: " + path);
    std::string content;
    content.resize(repo.max_read_bytes);
    in.read(content.data(), static_cast<std::streamsize>(repo.max_read_bytes));
    content.resize(static_cast<size_t>(in.gcount()));
    if (in.peek() != std::ifstream::traits_type::eof()) {
        std::error_code ec;
        auto total = fs::file_size(abs, ec);
        content += "\n[truncated: first " + std::to_string(repo.max_read_bytes) + " of " +
                   (ec ? std::string("?") : std::to_string(total)) + " bytes shown]";
    }
    return content;
}

Snippet read_snippet(const RepoHandle& repo, const std::string& path, int line, int context) {
    auto abs = repo.resolve(path);
    if (sniff_binary(abs)) throw BinaryFileError("binary content: " + path);
    auto lines = read_lines(abs);
    if (lines.empty()) lines.push_back("");
    const int eof = static_cast<int>(lines.size());
    line = std::clamp(line, 1, eof);
    if (context < 0) context = 0;
    Snippet s;
    s.file = path;
    s.start_line = std::max(1, line - context);
    s.end_line = std::min(eof, line + context);
    for (int i = s.start_line; i <= s.end_line; ++i) {
        s.lines.push_back(lines[static_cast<size_t>(i - 1)]);
    }
    return s;
}

namespace {

void parse_requirements(const RepoHandle& repo, const std::string& rel,
                        DependencyExtraction& out) {
    static const std::regex pin{
        R"(^([A-Za-z0-9][A-Za-z0-9._-]*)(\[[^\]]*\])?\s*([=<>!~][^;#]*)?\s*(;.*)?$)"};
    auto lines = read_lines(repo.resolve(rel));
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        // trim
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        line = line.substr(first, line.find_last_not_of(" \t") - first + 1);
        if (line.empty()) continue;
        std::smatch m;
        if (!std::regex_match(line, m, pin)) {
            out.warnings.push_back({rel, static_cast<int>(i + 1),
                                    "skipped unparseable requirement line: " + line});
            continue;
        }
        DependencySpec spec;
        spec.manifest = rel;
        spec.package = m[1].str();
        if (m[3].matched) {
            auto c = m[3].str();
            auto end = c.find_last_not_of(" \t");
            if (end != std::string::npos) c = c.substr(0, end + 1);
            if (!c.empty()) spec.version_constraint = c;
        }
        out.specs.push_back(std::move(spec));
    }
}

void parse_pyproject(const RepoHandle& repo, const std::string& rel, DependencyExtraction& out) {
    auto lines = read_lines(repo.resolve(rel));
    bool in_project = false;
    bool in_deps = false;
    static const std::regex quoted{R"re("([^"]+)"|'([^']+)')re"};
    for (size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        auto stripped = line.substr(line.find_first_not_of(" \t") == std::string::npos
                                        ? line.size()
                                        : line.find_first_not_of(" \t"));
        if (!stripped.empty() && stripped.front() == '[') {
            in_project = stripped.starts_with("[project]");
            in_deps = false;
            continue;
        }
        if (in_project && stripped.starts_with("dependencies")) in_deps = true;
        if (!in_deps) continue;
        for (auto it = std::sregex_iterator(line.begin(), line.end(), quoted);
             it != std::sregex_iterator(); ++it) {
            auto req = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
            auto cut = req.find_first_of("=<>!~;[ ");
            DependencySpec spec;
            spec.manifest = rel;
            spec.package = cut == std::string::npos ? req : req.substr(0, cut);
            if (cut != std::string::npos) {
                auto c = req.substr(cut);
                if (auto semi = c.find(';'); semi != std::string::npos) c = c.substr(0, semi);
                while (!c.empty() && (c.back() == ' ' || c.back() == '\t')) c.pop_back();
                if (!c.empty() && c.front() != '[') spec.version_constraint = c;
            }
            if (!spec.package.empty()) out.specs.push_back(std::move(spec));
        }
        if (line.find(']') != std::string::npos) in_deps = false;
    }
}

} // namespace

DependencyExtraction extract_dependency_files(const RepoHandle& repo) {
    DependencyExtraction out;
    for (const auto& rel : repo.file_index) {
        auto base = basename_lower(rel);
        if (base.starts_with("requirements") && base.ends_with(".txt")) {
            parse_requirements(repo, rel, out);
        } else if (base == "pyproject.toml") {
            parse_pyproject(repo, rel, out);
        }
    }
    return out;
}

std::vector<EntryPoint> detect_entrypoints(const RepoHandle& repo) {
    std::vector<EntryPoint> out;
    static const std::regex main_guard{R"re(if\s+__name__\s*==\s*["']__main__["'])re"};
    static const std::regex cli_parse{
        R"((argparse\.ArgumentParser|ArgumentParser\s*\(|@click\.(command|group)|click\.Group|sys\.argv))"};
    static const std::regex make_target{
        R"(^(run|start|demo|serve|reproduce|eval|evaluate|experiment|experiments)\s*:([^=]|$))"};
    static const std::regex run_command{
        R"re((python3?\s+\S+\.py|bash\s+\S+\.sh|sh\s+\S+\.sh|^\s*\$\s+\S+|\./\S+\.(sh|py)))re"};

    for (const auto& rel : repo.file_index) {
        if (is_python_file(rel)) {
            auto lines = read_lines(repo.resolve(rel));
            bool saw_guard = false, saw_cli = false;
            for (const auto& line : lines) {
                if (!saw_guard && std::regex_search(line, main_guard)) {
                    out.push_back({rel, EntryPointKind::main_guard, line});
                    saw_guard = true;
                }
                if (!saw_cli && std::regex_search(line, cli_parse)) {
                    out.push_back({rel, EntryPointKind::script_with_cli_parse, line});
                    saw_cli = true;
                }
            }
        } else if (basename_lower(rel) == "makefile" || basename_lower(rel) == "gnumakefile") {
            auto lines = read_lines(repo.resolve(rel));
            for (const auto& line : lines) {
                if (std::regex_search(line, make_target)) {
                    out.push_back({rel, EntryPointKind::makefile_target, line});
                }
            }
        } else if (is_readme(rel)) {
            if (sniff_binary(repo.resolve(rel))) continue;
            auto lines = read_lines(repo.resolve(rel));
            for (const auto& line : lines) {
                if (std::regex_search(line, run_command)) {
                    out.push_back({rel, EntryPointKind::documented_run_command, line});
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const EntryPoint& a, const EntryPoint& b) {
        if (a.file != b.file) return a.file < b.file;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    return out;
}

std::vector<SearchHit> search_package_usage(const RepoHandle& repo, const std::string& package) {
    std::vector<SearchHit> hits;
    if (package.empty()) return hits;
    std::set<std::string> candidates{package};
    std::string underscored = package;
    std::replace(underscored.begin(), underscored.end(), '-', '_');
    candidates.insert(underscored);

    std::vector<std::regex> patterns;
    for (const auto& cand : candidates) {
        std::string esc;
        for (char c : cand) {
            if (std::strchr(".^$+()[]{}|\\*?", c)) esc += '\\';
            esc += c;
        }
        patterns.emplace_back(R"((^|[^\w.])import\s+)" + esc + R"(([.\s,]|$))");
        patterns.emplace_back(R"((^|[^\w.])from\s+)" + esc + R"(([.\s]))");
        patterns.emplace_back(R"((^|[^\w.]))" + esc + R"(\.[A-Za-z_])");
    }

    for (const auto& rel : repo.file_index) {
        if (!is_python_file(rel)) continue;
        auto lines = read_lines(repo.resolve(rel));
        for (size_t i = 0; i < lines.size(); ++i) {
            for (const auto& re : patterns) {
                if (std::regex_search(lines[i], re)) {
                    hits.push_back({rel, static_cast<int>(i + 1), lines[i]});
                    break;
                }
            }
        }
    }
    return hits;
}

std::vector<SearchHit> search_repo(const RepoHandle& repo, const std::string& query, int max_hits) {
    std::regex re;
    try {
        re = std::regex(query);
    } catch (const std::regex_error& e) {
        throw PatternError("invalid search pattern '" + query + "': " + e.what());
    }
    std::vector<SearchHit> hits;
    if (max_hits <= 0) return hits;
    for (const auto& rel : repo.file_index) {
        if (sniff_binary(repo.resolve(rel))) continue;
        auto lines = read_lines(repo.resolve(rel));
        for (size_t i = 0; i < lines.size(); ++i) {
            if (std::regex_search(lines[i], re)) {
                hits.push_back({rel, static_cast<int>(i + 1), lines[i]});
                if (static_cast<int>(hits.size()) >= max_hits) return hits;
            }
        }
    }
    return hits;
}

namespace {

struct RawSpan {
    int start = 0; // 1-based header line
    int end = 0;
    int indent = 0;
    std::string name;
    bool is_class = false;
};

int indent_width(const std::string& line) {
    int width = 0;
    for (char c : line) {
        if (c == ' ') ++width;
        else if (c == '\t') width += 8 - width % 8;
        else break;
    }
    return width;
}

bool transparent_line(const std::string& line) {
    auto pos = line.find_first_not_of(" \t");
    return pos == std::string::npos || line[pos] == '#';
}

std::vector<RawSpan> collect_spans(const std::vector<std::string>& lines) {
    static const std::regex header{
        R"(^\s*(?:async\s+)?(def|class|function|fn)\s+([A-Za-z_][A-Za-z0-9_]*))"};
    std::vector<RawSpan> spans;
    for (size_t i = 0; i < lines.size(); ++i) {
        std::smatch m;
        if (!std::regex_search(lines[i], m, header)) continue;
        RawSpan span;
        span.start = static_cast<int>(i + 1);
        span.indent = indent_width(lines[i]);
        span.name = m[2].str();
        span.is_class = m[1].str() == "class";
        int last_code = span.start;
        for (size_t j = i + 1; j < lines.size(); ++j) {
            if (transparent_line(lines[j])) continue;
            if (indent_width(lines[j]) <= span.indent) break;
            last_code = static_cast<int>(j + 1);
        }
        span.end = last_code;
        spans.push_back(std::move(span));
    }
    return spans;
}

} // namespace

FunctionSpan extract_enclosing_function(const RepoHandle& repo, const std::string& path, int line) {
    auto abs = repo.resolve(path);
    if (sniff_binary(abs)) throw BinaryFileError("binary content: " + path);
    auto lines = read_lines(abs);
    const int eof = std::max(1, static_cast<int>(lines.size()));
    if (line < 1 || line > eof) {
        throw NavigationError("line " + std::to_string(line) + " outside " + path + " (1-" +
                              std::to_string(eof) + ")");
    }
    const bool python = is_python_file(path);
    auto spans = collect_spans(lines);

    const RawSpan* innermost = nullptr;
    for (const auto& s : spans) {
        if (s.start <= line && line <= s.end) {
            if (!innermost || s.start > innermost->start) innermost = &s;
        }
    }

    FunctionSpan out;
    out.file = path;
    out.approximate = !python;
    if (!innermost) {
        out.name = "<module-level>";
        out.kind = SpanKind::module;
        out.start_line = 1;
        out.end_line = eof;
        return out;
    }

    out.name = innermost->name;
    out.start_line = innermost->start;
    out.end_line = innermost->end;
    if (innermost->is_class) {
        out.kind = SpanKind::class_def;
        return out;
    }
    // A def nested directly inside a class span is a method.
    const RawSpan* parent = nullptr;
    for (const auto& s : spans) {
        if (&s == innermost) continue;
        if (s.start <= innermost->start && innermost->end <= s.end) {
            if (!parent || s.start > parent->start) parent = &s;
        }
    }
    out.kind = (parent && parent->is_class) ? SpanKind::method : SpanKind::function;
    return out;
}

} // namespace artriage
