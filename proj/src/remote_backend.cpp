// SPDX-License-Identifier: Apache-2.0
#include "artriage/remote_backend.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

namespace artriage {

Transport make_http_transport(const RemoteConfig& config) {
    // Split scheme://host[:port] from the path up front; a malformed endpoint
    // is a configuration problem, not a retryable transport failure.
    const auto& url = config.endpoint_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError("endpoint url lacks a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    return [config, base, path, url](const std::string& request_body) -> std::string {
        httplib::Client client(base);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!config.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config.api_key);
        }
        auto res = client.Post(path, headers, request_body, "application/json");
        if (!res) {
            throw TransportError("request to " + url + " failed: " +
                                 httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 512));
        }
        return res->body;
    };
}

std::string RemoteBackend::system_prompt() {
    return
        "You are a security analyst triaging one static-analysis finding from a research code "
        "repository. Judge practical exploitability, not surface patterns.\n"
        "\n"
        "Assess four contextual dimensions:\n"
        "- attacker-controlled input: can an adversary control data reaching the flagged code "
        "(files, CLI arguments, network data)? Answer yes, no, or uncertain, with a short note.\n"
        "- reachability: does the flagged code execute during normal artifact usage? Answer "
        "yes, no, or uncertain, with a short note.\n"
        "- execution context: describe where and how the code runs in the workflow.\n"
        "- exploitation condition: describe what an attacker would need for a real exploit.\n"
        "\n"
        "Then pick exactly one label:\n"
        "- CONTEXTUAL_RISK: exploitable under realistic usage or deployment of the artifact.\n"
        "- HARDENING_RECOMMENDATION: unsafe practice with low impact right now; should be "
        "improved.\n"
        "- BENIGN_RESEARCH_USAGE: looks insecure but is intentional and required to demonstrate "
        "or reproduce the research (e.g. bundled test keys).\n"
        "- FALSE_POSITIVE: no real problem in context (e.g. a pinned dependency that is never "
        "used).\n"
        "\n"
        "Base every decision on evidence you gathered from the repository tools; do not assume "
        "undocumented inputs or deployments. When evidence is limited, say uncertain rather "
        "than overstating risk.\n"
        "\n"
        "When you are done, reply with ONLY a JSON object holding exactly these keys in this "
        "order: security_label, code_purpose, execution_context, "
        "required_conditions_for_exploit, input_controlled_by_attacker, "
        "reachable_in_artifact_execution, evidence_snippet, reasoning, recommendation. "
        "The two *_by_attacker / *_execution values must start with yes, no, or uncertain "
        "followed by \" - \" and a short note.";
}

json RemoteBackend::tool_schema() {
    auto obj = [](std::initializer_list<std::pair<const char*, json>> props,
                  std::vector<std::string> required) {
        json schema;
        schema["type"] = "object";
        schema["properties"] = json::object();
        for (const auto& [name, p] : props) schema["properties"][name] = p;
        schema["required"] = required;
        return schema;
    };
    json str{{"type", "string"}};
    json integer{{"type", "integer"}};

    struct ToolDef {
        const char* name;
        const char* description;
        json parameters;
    };
    const std::vector<ToolDef> defs = {
        {"get_repo_tree", "Hierarchical view of the repository, depth-bounded.",
         obj({{"max_depth", integer}}, {})},
        {"find_important_files", "Critical files such as README and dependency manifests.",
         obj({}, {})},
        {"read_file", "Full contents of one repository file.", obj({{"path", str}}, {"path"})},
        {"read_snippet", "Context lines around a specific line of a file.",
         obj({{"path", str}, {"line", integer}, {"context", integer}}, {"path", "line"})},
        {"extract_dependency_files", "Parsed dependency manifests (requirements, pyproject).",
         obj({}, {})},
        {"detect_entrypoints", "Potential entry points of the artifact.", obj({}, {})},
        {"search_package_usage", "Where a package is imported or called in the codebase.",
         obj({{"package", str}}, {"package"})},
        {"search_repo", "Regex search across repository text files.",
         obj({{"query", str}, {"max_hits", integer}}, {"query"})},
        {"extract_enclosing_function", "Enclosing function or class for a given line.",
         obj({{"path", str}, {"line", integer}}, {"path", "line"})},
    };

    json tools = json::array();
    for (const auto& d : defs) {
        tools.push_back({{"type", "function"},
                         {"function",
                          {{"name", d.name},
                           {"description", d.description},
                           {"parameters", d.parameters}}}});
    }
    return tools;
}

RemoteBackend::RemoteBackend(RemoteConfig config, Transport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (!transport_) transport_ = make_http_transport(config_);
}

json RemoteBackend::build_request(const SessionState& state, const std::string& observation) {
    if (!session_started_) {
        messages_.push_back({{"role", "system"}, {"content", system_prompt()}});
        messages_.push_back({{"role", "user"}, {"content", state.initial_context}});
        session_started_ = true;
    } else if (!pending_tool_call_id_.empty()) {
        messages_.push_back({{"role", "tool"},
                             {"tool_call_id", pending_tool_call_id_},
                             {"content", observation}});
        pending_tool_call_id_.clear();
    } else {
        // Corrective reprompt or other plain feedback.
        messages_.push_back({{"role", "user"}, {"content", observation}});
    }
    json body;
    body["model"] = config_.model_name;
    body["messages"] = messages_;
    body["tools"] = tool_schema();
    return body;
}

StepResult RemoteBackend::parse_response(const json& response) {
    StepResult result;
    if (response.contains("usage") && response.at("usage").is_object()) {
        const auto& usage = response.at("usage");
        result.input_tokens = usage.value("prompt_tokens", 0L);
        result.output_tokens = usage.value("completion_tokens", 0L);
    }
    if (!response.contains("choices") || !response.at("choices").is_array() ||
        response.at("choices").empty()) {
        throw ProtocolError("chat response holds no choices");
    }
    const auto& message = response.at("choices").at(0).value("message", json::object());
    if (message.contains("tool_calls") && message.at("tool_calls").is_array() &&
        !message.at("tool_calls").empty()) {
        const auto& call = message.at("tool_calls").at(0);
        AgentAction action;
        action.kind = AgentAction::Kind::tool_call;
        action.tool_name = call.value("function", json::object()).value("name", std::string{});
        auto args_text =
            call.value("function", json::object()).value("arguments", std::string{"{}"});
        try {
            action.arguments = json::parse(args_text);
        } catch (const json::parse_error&) {
            action.arguments = json::object();
        }
        action.rationale = message.value("content", std::string{});
        result.action = std::move(action);
        return result;
    }
    const std::string content = message.value("content", std::string{});
    AgentAction action;
    action.kind = AgentAction::Kind::final_answer;
    try {
        // Tolerate fenced or prefixed answers by extracting the outer object.
        auto start = content.find('{');
        auto end = content.rfind('}');
        if (start == std::string::npos || end == std::string::npos || end < start) {
            throw ParseError("no JSON object in final answer");
        }
        action.answer = parse_assessment(content.substr(start, end - start + 1));
    } catch (const ParseError&) {
        action.answer = std::nullopt; // schema guard in the agent loop reprompts once
    }
    result.action = std::move(action);
    return result;
}

StepResult RemoteBackend::step(const SessionState& state, const std::string& observation) {
    const json body = build_request(state, observation);
    std::string response_text;
    std::string last_error;
    bool sent = false;
    for (int attempt = 0; attempt < std::max(1, config_.max_attempts); ++attempt) {
        if (attempt > 0) {
            auto pause = config_.backoff_seconds * static_cast<double>(1 << (attempt - 1));
            if (pause > 0) {
                std::this_thread::sleep_for(std::chrono::duration<double>(pause));
            }
        }
        try {
            response_text = transport_(body.dump());
            sent = true;
            break;
        } catch (const TransportError& e) {
            last_error = e.what();
        }
    }
    if (!sent) {
        throw TransportError("remote backend unreachable after " +
                             std::to_string(std::max(1, config_.max_attempts)) +
                             " attempt(s): " + last_error);
    }

    json response;
    try {
        response = json::parse(response_text);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("chat response is not valid JSON: ") + e.what());
    }
    auto result = parse_response(response);

    // Keep the conversation consistent for the next request.
    if (result.action.kind == AgentAction::Kind::tool_call) {
        pending_tool_call_id_ = "call_" + std::to_string(next_tool_call_index_++);
        messages_.push_back(
            {{"role", "assistant"},
             {"content", result.action.rationale},
             {"tool_calls",
              json::array({{{"id", pending_tool_call_id_},
                            {"type", "function"},
                            {"function",
                             {{"name", result.action.tool_name},
                              {"arguments", result.action.arguments.dump()}}}}})}});
    } else {
        std::string content;
        if (result.action.answer && validate_assessment(*result.action.answer).ok()) {
            content = serialize_assessment(*result.action.answer);
        }
        messages_.push_back({{"role", "assistant"}, {"content", content}});
    }
    return result;
}

} // namespace artriage
