// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "artriage/model.hpp"
#include "artriage/repo_context.hpp"

namespace artriage {

enum class BackendKind { heuristic, remote_model };
std::string to_string(BackendKind k);

/// The nine tool names the agent may call, in registry order.
const std::vector<std::string>& registered_tool_names();

/// Executes one registered tool against the snapshot and renders the result
/// as a plain-text observation block. Tool-level failures (bad path, binary
/// file, bad pattern) come back as "error: ..." observations.
std::string run_repo_tool(const RepoHandle& repo, const std::string& tool_name,
                          const json& arguments);

struct AgentAction {
    enum class Kind { tool_call, final_answer };
    Kind kind = Kind::final_answer;
    std::string tool_name;
    json arguments = json::object();
    std::optional<Assessment> answer;
    std::string rationale;
};

struct AgentStep {
    AgentAction action;
    std::string observation;
};

struct AgentTrace {
    FindingRef finding_ref;
    std::vector<AgentStep> steps;
    long input_tokens = 0;
    long output_tokens = 0;
    double wall_seconds = 0.0;
    BackendKind backend = BackendKind::heuristic;
};

struct Budget {
    int max_steps = 20;
    int max_observation_chars = 8000;
    double timeout_seconds = 600.0;
};

/// Evidence gathered before labeling.
struct EvidenceBundle {
    int dependency_usage_hits = 0;
    TriState reachable_from_entrypoint;
    std::vector<std::string> research_demo_markers;
    ContextDimensions dimensions;
};

struct BudgetExceededError : std::runtime_error {
    AgentTrace partial_trace;
    explicit BudgetExceededError(std::string msg, AgentTrace trace)
        : std::runtime_error(std::move(msg)), partial_trace(std::move(trace)) {}
};

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fills the four contextual dimensions for one finding. Dependency findings
/// lean on package-usage search and entrypoint detection; code findings on
/// snippet/function context plus a 2-hop textual import walk from the
/// detected entrypoints. Unresolvable locations yield all-uncertain
/// dimensions with explanatory notes.
EvidenceBundle gather_dimensions(const Finding& finding, const RepoHandle& repo);

/// Deterministic decision workflow, strict rule precedence:
///   1. dependency finding without usage, or code finding not reachable -> FALSE_POSITIVE
///   2. research/demo markers and no live trust boundary -> BENIGN_RESEARCH_USAGE
///   3. attacker and reachability at least uncertain, one of them yes -> CONTEXTUAL_RISK
///   4. otherwise -> HARDENING_RECOMMENDATION
SecurityLabel heuristic_decide(const EvidenceBundle& evidence, const Finding& finding);

/// Full nine-field verdict from the rule templates.
Assessment heuristic_assess(const Finding& finding, const RepoHandle& repo);

struct SessionState {
    Finding finding;
    std::string initial_context;
    const std::vector<AgentStep>* history = nullptr;
    int step_index = 0;
};

struct StepResult {
    AgentAction action;
    long input_tokens = 0;
    long output_tokens = 0;
};

/// Backend contract: one reasoning step given the latest observation.
class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendKind kind() const = 0;
    virtual StepResult step(const SessionState& state, const std::string& observation) = 0;
};

/// Computes the verdict directly from repository evidence; no tokens spent.
class HeuristicBackend : public Backend {
public:
    explicit HeuristicBackend(const RepoHandle& repo) : repo_(&repo) {}
    BackendKind kind() const override { return BackendKind::heuristic; }
    StepResult step(const SessionState& state, const std::string& observation) override;

private:
    const RepoHandle* repo_;
};

/// Replays a fixed transcript of actions; stands in for the remote protocol
/// in tests and in recorded-session replays.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<AgentAction> transcript,
                             std::vector<std::pair<long, long>> per_step_tokens = {})
        : transcript_(std::move(transcript)), tokens_(std::move(per_step_tokens)) {}
    BackendKind kind() const override { return BackendKind::remote_model; }
    StepResult step(const SessionState& state, const std::string& observation) override;

private:
    std::vector<AgentAction> transcript_;
    std::vector<std::pair<long, long>> tokens_;
    std::size_t next_ = 0;
};

struct AnalysisResult {
    Assessment assessment;
    AgentTrace trace;
};

/// Bounded reason/act loop. Observations are truncated to the budget with an
/// explicit marker; the trace always ends with exactly one final answer.
AnalysisResult analyze_finding(const Finding& finding, const RepoHandle& repo, Backend& backend,
                               const Budget& budget);

/// Finding context block handed to a backend at session start (normalized
/// fields plus an initial snippet when the location resolves).
std::string initial_finding_context(const Finding& finding, const RepoHandle& repo);

} // namespace artriage
