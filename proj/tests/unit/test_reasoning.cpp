// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "artriage/reasoning.hpp"
#include "artriage/remote_backend.hpp"

using namespace artriage;

namespace {

const std::string kFixtures = ARTRIAGE_FIXTURES_DIR;

Finding key_finding() {
    Finding f;
    f.artifact_id = "bootguard";
    f.tool = Tool::builtin;
    f.finding_id = "builtin.secret.private-key";
    f.category = FindingCategory::code_issue;
    f.severity = Severity::high;
    f.file = "vendor/sign_tool/TestCert.pem";
    f.line = 8;
    f.message = "embedded private key material";
    f.cwe_ids = {"CWE-798"};
    return f;
}

Finding shell_finding() {
    Finding f;
    f.artifact_id = "hostprint";
    f.tool = Tool::builtin;
    f.finding_id = "builtin.command.shell-spawn";
    f.category = FindingCategory::code_issue;
    f.severity = Severity::high;
    f.file = "box.py";
    f.line = 19;
    f.message = "subprocess spawned with shell=True";
    f.cwe_ids = {"CWE-78"};
    return f;
}

Finding dep_finding() {
    Finding f;
    f.artifact_id = "poisonbench";
    f.tool = Tool::trivy;
    f.finding_id = "CVE-2023-32681";
    f.category = FindingCategory::dependency_vuln;
    f.severity = Severity::medium;
    f.file = "requirements.txt";
    f.message = "proxy header leak";
    f.package = "requests";
    f.version = "2.29.0";
    f.cwe_ids = {"CWE-200"};
    f.cve_ids = {"CVE-2023-32681"};
    return f;
}

Assessment valid_answer(SecurityLabel label = SecurityLabel::hardening_recommendation) {
    Assessment a;
    a.security_label = label;
    a.code_purpose = "probe helper";
    a.execution_context = "runs from the cli";
    a.required_conditions_for_exploit = "attacker must control the host argument";
    a.input_controlled_by_attacker = "yes - host argument comes from the command line";
    a.reachable_in_artifact_execution = "yes - called from the main entrypoint";
    a.evidence_snippet = "box.py:19";
    a.reasoning = "external value reaches a shell";
    a.recommendation = "use shell=False";
    return a;
}

AgentAction tool_call(const std::string& name, json args = json::object()) {
    AgentAction action;
    action.kind = AgentAction::Kind::tool_call;
    action.tool_name = name;
    action.arguments = std::move(args);
    return action;
}

AgentAction final_answer(Assessment a) {
    AgentAction action;
    action.kind = AgentAction::Kind::final_answer;
    action.answer = std::move(a);
    return action;
}

} // namespace

TEST_CASE("gather_dimensions") {
    SUBCASE("pinned-but-unused dependency: both dimensions no") {
        auto repo = RepoHandle::open(kFixtures + "/case3_unused_dep");
        auto e = gather_dimensions(dep_finding(), repo);
        CHECK(e.dependency_usage_hits == 0);
        CHECK(e.dimensions.attacker_controlled_input.value == TriValue::no);
        CHECK(e.dimensions.reachability.value == TriValue::no);
        CHECK_FALSE(e.dimensions.attacker_controlled_input.note.empty());
        CHECK_FALSE(e.dimensions.execution_context.empty());
        CHECK_FALSE(e.dimensions.exploitation_condition.empty());
    }
    SUBCASE("shell spawn reachable from the entrypoint: both yes") {
        auto repo = RepoHandle::open(kFixtures + "/case2_probe");
        auto e = gather_dimensions(shell_finding(), repo);
        CHECK(e.dimensions.attacker_controlled_input.value == TriValue::yes);
        CHECK(e.dimensions.reachability.value == TriValue::yes);
    }
    SUBCASE("vendored key: static input, uncertain reachability, demo markers") {
        auto repo = RepoHandle::open(kFixtures + "/case1_keytool");
        auto e = gather_dimensions(key_finding(), repo);
        CHECK(e.dimensions.attacker_controlled_input.value == TriValue::no);
        CHECK(e.dimensions.reachability.value == TriValue::uncertain);
        CHECK_FALSE(e.research_demo_markers.empty());
    }
    SUBCASE("finding pointing at a deleted file: all uncertain") {
        auto repo = RepoHandle::open(kFixtures + "/case2_probe");
        auto f = shell_finding();
        f.file = "ghost.py";
        auto e = gather_dimensions(f, repo);
        CHECK(e.dimensions.attacker_controlled_input.value == TriValue::uncertain);
        CHECK(e.dimensions.reachability.value == TriValue::uncertain);
        CHECK_FALSE(e.dimensions.attacker_controlled_input.note.empty());
    }
}

TEST_CASE("heuristic_decide rule precedence") {
    auto bundle = [](TriValue attacker, TriValue reach, bool markers, int hits) {
        EvidenceBundle e;
        e.dimensions.attacker_controlled_input = {attacker, "n"};
        e.dimensions.reachability = {reach, "n"};
        e.dimensions.execution_context = "ctx";
        e.dimensions.exploitation_condition = "cond";
        e.dependency_usage_hits = hits;
        if (markers) e.research_demo_markers = {"path segment 'vendor'"};
        return e;
    };
    Finding code = shell_finding();
    Finding dep = dep_finding();

    SUBCASE("unused vulnerable dependency is a false positive") {
        CHECK(heuristic_decide(bundle(TriValue::no, TriValue::no, false, 0), dep) ==
              SecurityLabel::false_positive);
    }
    SUBCASE("unreachable code is a false positive even with markers") {
        CHECK(heuristic_decide(bundle(TriValue::no, TriValue::no, true, 0), code) ==
              SecurityLabel::false_positive);
    }
    SUBCASE("vendored demo content without live trust boundary is benign research usage") {
        CHECK(heuristic_decide(bundle(TriValue::no, TriValue::uncertain, true, 0), code) ==
              SecurityLabel::benign_research_usage);
    }
    SUBCASE("attacker yes and reachable yes is a contextual risk") {
        CHECK(heuristic_decide(bundle(TriValue::yes, TriValue::yes, false, 0), code) ==
              SecurityLabel::contextual_risk);
        // markers do not shield a live trust boundary
        CHECK(heuristic_decide(bundle(TriValue::yes, TriValue::yes, true, 0), code) ==
              SecurityLabel::contextual_risk);
    }
    SUBCASE("one yes with one uncertain is still a contextual risk") {
        CHECK(heuristic_decide(bundle(TriValue::uncertain, TriValue::yes, false, 0), code) ==
              SecurityLabel::contextual_risk);
        CHECK(heuristic_decide(bundle(TriValue::yes, TriValue::uncertain, false, 0), code) ==
              SecurityLabel::contextual_risk);
    }
    SUBCASE("double uncertainty does not inflate to contextual risk") {
        CHECK(heuristic_decide(bundle(TriValue::uncertain, TriValue::uncertain, false, 0), code) ==
              SecurityLabel::hardening_recommendation);
    }
    SUBCASE("used dependency with no attacker path is a hardening recommendation") {
        CHECK(heuristic_decide(bundle(TriValue::no, TriValue::yes, false, 3), dep) ==
              SecurityLabel::hardening_recommendation);
    }
}

TEST_CASE("heuristic soundness over the full evidence grid") {
    const TriValue values[] = {TriValue::yes, TriValue::no, TriValue::uncertain};
    const FindingCategory categories[] = {FindingCategory::code_issue,
                                          FindingCategory::dependency_vuln,
                                          FindingCategory::config_issue};
    int combos = 0;
    for (auto attacker : values) {
        for (auto reach : values) {
            for (bool markers : {false, true}) {
                for (auto category : categories) {
                    for (int hits : {0, 2}) {
                        EvidenceBundle e;
                        e.dimensions.attacker_controlled_input = {attacker, "n"};
                        e.dimensions.reachability = {reach, "n"};
                        e.dependency_usage_hits = hits;
                        if (markers) e.research_demo_markers = {"m"};
                        Finding f;
                        f.artifact_id = "a";
                        f.finding_id = "x";
                        f.category = category;
                        if (category == FindingCategory::dependency_vuln) f.package = "p";
                        auto label = heuristic_decide(e, f);
                        ++combos;
                        // total: label is always one of the four
                        bool known = label == SecurityLabel::contextual_risk ||
                                     label == SecurityLabel::hardening_recommendation ||
                                     label == SecurityLabel::benign_research_usage ||
                                     label == SecurityLabel::false_positive;
                        CHECK(known);
                        if (attacker == TriValue::no && reach == TriValue::no) {
                            CHECK(label != SecurityLabel::contextual_risk);
                        }
                    }
                }
            }
        }
    }
    CHECK(combos == 3 * 3 * 2 * 3 * 2);
}

TEST_CASE("heuristic assessments for the three case repositories") {
    SUBCASE("vendored signing key is benign research usage") {
        auto repo = RepoHandle::open(kFixtures + "/case1_keytool");
        auto a = heuristic_assess(key_finding(), repo);
        CHECK(a.security_label == SecurityLabel::benign_research_usage);
        CHECK(validate_assessment(a).ok());
    }
    SUBCASE("reachable shell spawn is a contextual risk with a shell=False fix") {
        auto repo = RepoHandle::open(kFixtures + "/case2_probe");
        auto a = heuristic_assess(shell_finding(), repo);
        CHECK(a.security_label == SecurityLabel::contextual_risk);
        CHECK(a.recommendation.find("shell=False") != std::string::npos);
        CHECK(validate_assessment(a).ok());
    }
    SUBCASE("unused pinned dependency is a false positive") {
        auto repo = RepoHandle::open(kFixtures + "/case3_unused_dep");
        auto a = heuristic_assess(dep_finding(), repo);
        CHECK(a.security_label == SecurityLabel::false_positive);
        CHECK(a.reachable_in_artifact_execution.starts_with("no"));
        CHECK(validate_assessment(a).ok());
    }
}

TEST_CASE("analyze_finding with the heuristic backend") {
    auto repo = RepoHandle::open(kFixtures + "/case2_probe");
    HeuristicBackend backend(repo);
    Budget budget;
    auto result = analyze_finding(shell_finding(), repo, backend, budget);
    CHECK(result.assessment.security_label == SecurityLabel::contextual_risk);
    CHECK(result.trace.backend == BackendKind::heuristic);
    CHECK(result.trace.input_tokens == 0);
    CHECK(result.trace.output_tokens == 0);
    REQUIRE_FALSE(result.trace.steps.empty());
    CHECK(result.trace.steps.back().action.kind == AgentAction::Kind::final_answer);
    int finals = 0;
    for (const auto& s : result.trace.steps) {
        if (s.action.kind == AgentAction::Kind::final_answer) ++finals;
    }
    CHECK(finals == 1);
}

TEST_CASE("zero step budget fails with the partial trace attached") {
    auto repo = RepoHandle::open(kFixtures + "/case2_probe");
    ScriptedBackend backend({final_answer(valid_answer())});
    Budget budget;
    budget.max_steps = 0;
    try {
        analyze_finding(shell_finding(), repo, backend, budget);
        FAIL("expected BudgetExceededError");
    } catch (const BudgetExceededError& e) {
        CHECK(e.partial_trace.steps.empty());
        CHECK(e.partial_trace.backend == BackendKind::remote_model);
    }
}

TEST_CASE("scripted transcript replay") {
    auto repo = RepoHandle::open(kFixtures + "/case2_probe");
    auto answer = valid_answer(SecurityLabel::contextual_risk);
    std::vector<AgentAction> transcript = {
        tool_call("get_repo_tree", json{{"max_depth", 2}}),
        tool_call("read_snippet", json{{"path", "box.py"}, {"line", 19}, {"context", 3}}),
        tool_call("search_package_usage", json{{"package", "requests"}}),
        final_answer(answer),
    };
    std::vector<std::pair<long, long>> tokens = {{100, 20}, {220, 25}, {150, 15}, {400, 90}};
    ScriptedBackend backend(transcript, tokens);
    Budget budget;
    auto result = analyze_finding(shell_finding(), repo, backend, budget);

    // trace mirrors the transcript exactly
    REQUIRE(result.trace.steps.size() == transcript.size());
    CHECK(result.assessment == answer);
    for (size_t i = 0; i + 1 < result.trace.steps.size(); ++i) {
        CHECK(result.trace.steps[i].action.kind == AgentAction::Kind::tool_call);
        CHECK(result.trace.steps[i].action.tool_name == transcript[i].tool_name);
        CHECK_FALSE(result.trace.steps[i].observation.empty());
    }
    CHECK(result.trace.steps.back().action.kind == AgentAction::Kind::final_answer);
    // token accounting accumulates every step
    CHECK(result.trace.input_tokens == 100 + 220 + 150 + 400);
    CHECK(result.trace.output_tokens == 20 + 25 + 15 + 90);
}

TEST_CASE("protocol guards") {
    auto repo = RepoHandle::open(kFixtures + "/case2_probe");
    Budget budget;
    SUBCASE("unknown tool gets one corrective reprompt") {
        ScriptedBackend backend({tool_call("run_code"), tool_call("get_repo_tree"),
                                 final_answer(valid_answer())});
        auto result = analyze_finding(shell_finding(), repo, backend, budget);
        // the invalid action is not recorded; the corrected session completes
        CHECK(result.trace.steps.size() == 2);
    }
    SUBCASE("second unknown tool is a protocol error") {
        ScriptedBackend backend({tool_call("run_code"), tool_call("spawn_shell"),
                                 final_answer(valid_answer())});
        CHECK_THROWS_AS(analyze_finding(shell_finding(), repo, backend, budget), ProtocolError);
    }
    SUBCASE("schema-violating final answer gets one reprompt") {
        auto broken = valid_answer();
        broken.recommendation.clear();
        ScriptedBackend backend({final_answer(broken), final_answer(valid_answer())});
        auto result = analyze_finding(shell_finding(), repo, backend, budget);
        CHECK(result.trace.steps.size() == 1);
        CHECK(result.assessment == valid_answer());
    }
    SUBCASE("two schema violations are a protocol error") {
        auto broken = valid_answer();
        broken.recommendation.clear();
        ScriptedBackend backend({final_answer(broken), final_answer(broken)});
        CHECK_THROWS_AS(analyze_finding(shell_finding(), repo, backend, budget), ProtocolError);
    }
    SUBCASE("running out of steps raises budget-exceeded with the partial trace") {
        ScriptedBackend backend({tool_call("get_repo_tree"), tool_call("get_repo_tree"),
                                 tool_call("get_repo_tree")});
        Budget tight;
        tight.max_steps = 3;
        try {
            analyze_finding(shell_finding(), repo, backend, tight);
            FAIL("expected BudgetExceededError");
        } catch (const BudgetExceededError& e) {
            CHECK(e.partial_trace.steps.size() == 3);
        }
    }
}

TEST_CASE("observations are truncated to the budget with a marker") {
    auto repo = RepoHandle::open(kFixtures + "/case2_probe");
    ScriptedBackend backend({tool_call("read_file", json{{"path", "box.py"}}),
                             final_answer(valid_answer())});
    Budget budget;
    budget.max_observation_chars = 40;
    auto result = analyze_finding(shell_finding(), repo, backend, budget);
    REQUIRE(result.trace.steps.size() == 2);
    const auto& obs = result.trace.steps[0].observation;
    CHECK(obs.find("truncated") != std::string::npos);
    CHECK(obs.size() < 120);
}

TEST_CASE("analyses of distinct findings are order independent") {
    auto repo2 = RepoHandle::open(kFixtures + "/case2_probe");
    auto repo3 = RepoHandle::open(kFixtures + "/case3_unused_dep");
    auto a1 = heuristic_assess(shell_finding(), repo2);
    auto b1 = heuristic_assess(dep_finding(), repo3);
    auto b2 = heuristic_assess(dep_finding(), repo3);
    auto a2 = heuristic_assess(shell_finding(), repo2);
    CHECK(a1 == a2);
    CHECK(b1 == b2);
}

TEST_CASE("run_repo_tool covers the registered tool set") {
    auto repo = RepoHandle::open(kFixtures + "/case2_probe");
    for (const auto& name : registered_tool_names()) {
        json args;
        if (name == "read_file" || name == "read_snippet" ||
            name == "extract_enclosing_function") {
            args = json{{"path", "box.py"}, {"line", 19}};
        } else if (name == "search_package_usage") {
            args = json{{"package", "subprocess"}};
        } else if (name == "search_repo") {
            args = json{{"query", "shell"}};
        }
        auto obs = run_repo_tool(repo, name, args);
        CHECK_FALSE(obs.empty());
    }
    CHECK(registered_tool_names().size() == 9);
    SUBCASE("tool errors surface as observations, not exceptions") {
        auto obs = run_repo_tool(repo, "read_file", json{{"path", "nope.py"}});
        CHECK(obs.starts_with("error:"));
        obs = run_repo_tool(repo, "search_repo", json{{"query", "(["}});
        CHECK(obs.starts_with("error:"));
        obs = run_repo_tool(repo, "read_snippet", json::object());
        CHECK(obs.starts_with("error:"));
    }
    SUBCASE("unregistered names are rejected") {
        CHECK_THROWS_AS(run_repo_tool(repo, "run_code", json::object()),
                        std::invalid_argument);
    }
}

TEST_CASE("remote backend protocol encoding") {
    RemoteConfig config;
    config.endpoint_url = "http://example.invalid/v1/chat/completions";
    config.model_name = "probe-model";
    config.backoff_seconds = 0.0;

    auto repo = RepoHandle::open(kFixtures + "/case2_probe");
    SessionState state;
    state.finding = shell_finding();
    state.initial_context = initial_finding_context(state.finding, repo);

    SUBCASE("first request carries the system prompt, context, and nine tools") {
        RemoteBackend backend(config, [](const std::string&) -> std::string {
            throw TransportError("unused");
        });
        auto body = backend.build_request(state, state.initial_context);
        REQUIRE(body.at("messages").size() == 2);
        CHECK(body.at("messages").at(0).at("role") == "system");
        CHECK(body.at("messages").at(1).at("role") == "user");
        CHECK(body.at("model") == "probe-model");
        REQUIRE(body.at("tools").size() == 9);
        for (size_t i = 0; i < 9; ++i) {
            CHECK(body.at("tools").at(i).at("function").at("name") ==
                  registered_tool_names()[i]);
        }
    }
    SUBCASE("tool-call responses parse into actions with usage") {
        json response = {
            {"choices",
             json::array({{{"message",
                            {{"role", "assistant"},
                             {"content", "inspecting"},
                             {"tool_calls",
                              json::array({{{"id", "call_0"},
                                            {"type", "function"},
                                            {"function",
                                             {{"name", "read_snippet"},
                                              {"arguments",
                                               "{\"path\": \"box.py\", \"line\": 19}"}}}}})}}}}})},
            {"usage", {{"prompt_tokens", 321}, {"completion_tokens", 17}}}};
        auto step = RemoteBackend::parse_response(response);
        CHECK(step.action.kind == AgentAction::Kind::tool_call);
        CHECK(step.action.tool_name == "read_snippet");
        CHECK(step.action.arguments.at("line") == 19);
        CHECK(step.input_tokens == 321);
        CHECK(step.output_tokens == 17);
    }
    SUBCASE("final-answer responses parse the assessment out of the content") {
        auto text = serialize_assessment(valid_answer());
        json response = {{"choices", json::array({{{"message",
                                                    {{"role", "assistant"},
                                                     {"content", "```json\n" + text + "\n```"}}}}})},
                         {"usage", {{"prompt_tokens", 10}, {"completion_tokens", 5}}}};
        auto step = RemoteBackend::parse_response(response);
        CHECK(step.action.kind == AgentAction::Kind::final_answer);
        REQUIRE(step.action.answer.has_value());
        CHECK(*step.action.answer == valid_answer());
    }
    SUBCASE("transport failures retry then raise a typed error") {
        int calls = 0;
        RemoteBackend backend(config, [&](const std::string&) -> std::string {
            ++calls;
            throw TransportError("connection refused");
        });
        CHECK_THROWS_AS(backend.step(state, state.initial_context), TransportError);
        CHECK(calls == 3);
    }
    SUBCASE("a retry that succeeds completes the step") {
        int calls = 0;
        auto text = serialize_assessment(valid_answer());
        RemoteBackend backend(config, [&](const std::string&) -> std::string {
            if (++calls < 3) throw TransportError("transient");
            json response = {{"choices", json::array({{{"message",
                                                        {{"role", "assistant"},
                                                         {"content", text}}}}})},
                             {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
            return response.dump();
        });
        auto step = backend.step(state, state.initial_context);
        CHECK(calls == 3);
        CHECK(step.action.kind == AgentAction::Kind::final_answer);
    }
    SUBCASE("garbage response bodies are protocol errors") {
        RemoteBackend backend(config,
                              [](const std::string&) -> std::string { return "not json"; });
        CHECK_THROWS_AS(backend.step(state, state.initial_context), ProtocolError);
    }
    SUBCASE("full agent loop over a fake transport") {
        int calls = 0;
        auto text = serialize_assessment(valid_answer(SecurityLabel::contextual_risk));
        RemoteBackend backend(config, [&](const std::string& request) -> std::string {
            auto body = json::parse(request);
            ++calls;
            if (calls == 1) {
                json response = {
                    {"choices",
                     json::array({{{"message",
                                    {{"role", "assistant"},
                                     {"content", ""},
                                     {"tool_calls",
                                      json::array(
                                          {{{"id", "call_0"},
                                            {"type", "function"},
                                            {"function",
                                             {{"name", "get_repo_tree"},
                                              {"arguments", "{\"max_depth\": 2}"}}}}})}}}}})},
                    {"usage", {{"prompt_tokens", 50}, {"completion_tokens", 9}}}};
                return response.dump();
            }
            // The tool observation must have been threaded back.
            CHECK(body.at("messages").back().at("role") == "tool");
            json response = {{"choices", json::array({{{"message",
                                                        {{"role", "assistant"},
                                                         {"content", text}}}}})},
                             {"usage", {{"prompt_tokens", 80}, {"completion_tokens", 40}}}};
            return response.dump();
        });
        Budget budget;
        auto result = analyze_finding(shell_finding(), repo, backend, budget);
        CHECK(result.trace.steps.size() == 2);
        CHECK(result.trace.input_tokens == 130);
        CHECK(result.trace.output_tokens == 49);
        CHECK(result.trace.backend == BackendKind::remote_model);
        CHECK(result.assessment.security_label == SecurityLabel::contextual_risk);
    }
}
