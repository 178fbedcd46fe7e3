// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "artriage/reasoning.hpp"

namespace artriage {

struct RemoteConfig {
    std::string endpoint_url; // e.g. https://host/v1/chat/completions
    std::string model_name;
    std::string api_key; // taken from the environment, never from config files
    int max_attempts = 3;
    double backoff_seconds = 0.5;
};

/// Sends one JSON request body, returns the response body. Throws
/// TransportError on connection/HTTP failure.
using Transport = std::function<std::string(const std::string& request_body)>;

/// HTTP transport over the configured endpoint (Bearer auth when a key is set).
Transport make_http_transport(const RemoteConfig& config);

/// Conversational-model backend speaking a JSON chat protocol with tool-call
/// affordances. The declared tool schema carries exactly the nine registered
/// tool names; the system prompt fixes the taxonomy, the contextual
/// dimensions, the conservative-classification rule, and the output schema.
class RemoteBackend : public Backend {
public:
    RemoteBackend(RemoteConfig config, Transport transport = {});

    BackendKind kind() const override { return BackendKind::remote_model; }
    StepResult step(const SessionState& state, const std::string& observation) override;

    /// Chat-completion request body for the next step (exposed for tests).
    json build_request(const SessionState& state, const std::string& observation);

    /// Parses one chat-completion response into an action + token usage.
    static StepResult parse_response(const json& response);

    static std::string system_prompt();
    static json tool_schema();

private:
    RemoteConfig config_;
    Transport transport_;
    json messages_ = json::array();
    bool session_started_ = false;
    int next_tool_call_index_ = 0;
    std::string pending_tool_call_id_;
};

} // namespace artriage
