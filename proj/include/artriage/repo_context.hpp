// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace artriage {

struct NavigationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BinaryFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PatternError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Read-only snapshot of a repository. The file index is built once at open
/// time; later filesystem changes are invisible. Symlinks are never indexed
/// and never followed, so no tool can read outside `root`.
struct RepoHandle {
    std::filesystem::path root;
    std::vector<std::string> file_index; // sorted repo-relative paths, '/' separators
    std::vector<std::string> ignore_rules;
    std::size_t max_read_bytes = 2 * 1024 * 1024;

    static std::vector<std::string> default_ignores();
    static RepoHandle open(const std::filesystem::path& root,
                           std::vector<std::string> ignore_rules = default_ignores());

    bool contains(const std::string& rel_path) const;
    /// Validates confinement and returns the absolute path of an indexed file.
    std::filesystem::path resolve(const std::string& rel_path) const;
};

struct Snippet {
    std::string file;
    int start_line = 1;
    int end_line = 1;
    std::vector<std::string> lines;
};

enum class EntryPointKind {
    main_guard,
    script_with_cli_parse,
    makefile_target,
    documented_run_command,
};
std::string to_string(EntryPointKind k);

struct EntryPoint {
    std::string file;
    EntryPointKind kind;
    std::string evidence; // verbatim line from the repository
};

struct DependencySpec {
    std::string manifest;
    std::string package;
    std::optional<std::string> version_constraint;
};

struct DependencyWarning {
    std::string manifest;
    int line = 0;
    std::string message;
};

struct DependencyExtraction {
    std::vector<DependencySpec> specs;
    std::vector<DependencyWarning> warnings;
};

enum class SpanKind { function, method, class_def, module };
std::string to_string(SpanKind k);

struct FunctionSpan {
    std::string file;
    std::string name; // "<module-level>" for module spans
    int start_line = 1;
    int end_line = 1;
    SpanKind kind = SpanKind::module;
    bool approximate = false;
};

struct SearchHit {
    std::string file;
    int line;
    std::string text;
};

struct ImportantFile {
    std::string path;
    std::string role;
};

/// Depth-bounded, sorted directory listing. Directories carry a trailing '/'.
std::string get_repo_tree(const RepoHandle& repo, int max_depth);

/// READMEs, licenses, dependency manifests, container/build files.
std::vector<ImportantFile> find_important_files(const RepoHandle& repo);

/// Full text of a file; contents beyond repo.max_read_bytes are cut and an
/// explicit truncation marker appended. Binary files raise BinaryFileError.
std::string read_file(const RepoHandle& repo, const std::string& path);

/// Lines [max(1, line-context), min(eof, line+context)].
Snippet read_snippet(const RepoHandle& repo, const std::string& path, int line, int context);

/// Parses requirements-style pin lists and pyproject project dependencies.
DependencyExtraction extract_dependency_files(const RepoHandle& repo);

/// Main-guard idioms, CLI-parser construction, runnable make targets, and
/// run commands quoted in README files. Deterministic (path, kind) order.
std::vector<EntryPoint> detect_entrypoints(const RepoHandle& repo);

/// Import statements and qualified call prefixes of `package` in python
/// sources, with token-boundary matching. Empty result = no usage found.
std::vector<SearchHit> search_package_usage(const RepoHandle& repo, const std::string& package);

/// Regex search across text files, capped at max_hits, (path, line) order.
std::vector<SearchHit> search_repo(const RepoHandle& repo, const std::string& query, int max_hits);

/// Innermost function/class span containing `line`; whole-file module span
/// when the line sits outside every definition. Non-python sources fall back
/// to an indentation heuristic and are flagged approximate.
FunctionSpan extract_enclosing_function(const RepoHandle& repo, const std::string& path, int line);

} // namespace artriage
