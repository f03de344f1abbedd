// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gatekeeper/classifier.hpp"
#include "gatekeeper/rules.hpp"

namespace gatekeeper::gateway {

enum class Action { Allow, Block, Flag };

const char* to_string(Action action);

/// JSON-RPC error code returned to the client for blocked tool calls.
inline constexpr int kBlockedErrorCode = -32001;
inline constexpr const char* kBlockedErrorMessage = "tool blocked by security policy";

struct PolicyConfig {
    Action action_on_malicious = Action::Block;
    bool use_rules = false;
    bool use_model = true;
    std::set<std::string> denylist;
    std::set<std::string> allowlist;
    std::string log_path;

    void validate() const;  // allowlist and denylist must not overlap
};

/// Flat key=value policy file: action_on_malicious, use_rules, use_model,
/// denylist (comma separated), allowlist, log_path.
PolicyConfig parse_policy(std::string_view text);
PolicyConfig load_policy(const std::filesystem::path& path);

struct Decision {
    std::string verdict;          // "benign" or "malicious"
    std::string predicted_class;  // empty when no model verdict exists
    Action action = Action::Block;
    std::string reason;
    std::vector<classifier::Attribution> attributions;
    std::vector<std::string> matched_rules;
};

/// Per-session interception state: verdict cache, id->method routing for
/// response correlation, rug-pull detection and the scan report. All entry
/// points serialize through one mutex; at most one classification runs per
/// unique (tool name, description digest).
class Session {
public:
    Session(const classifier::LinearModel* model, const rules::RuleSet* ruleset,
            PolicyConfig policy, std::ostream* report_sink = nullptr);

    /// Policy-aware verdict for one tool. Denylist beats allowlist beats the
    /// engines; any engine failure degrades to a block (fail-closed).
    /// Decisions are cached per (name, digest); cache hits re-run nothing.
    Decision classify_tool(const std::string& name, const std::string& description);

    struct Outcome {
        std::vector<std::string> to_server;
        std::vector<std::string> to_client;
    };

    /// Client -> server direction: intercepts tools/call requests, relays
    /// everything else untouched.
    Outcome on_client_line(const std::string& line);

    /// Server -> client direction: filters blocked tools out of tools/list
    /// results, relays everything else byte-identically.
    Outcome on_server_line(const std::string& line);

    size_t classification_count() const;
    std::vector<std::string> warnings() const;

private:
    Decision classify_locked(const std::string& name, const std::string& description,
                             const std::string& digest);
    Decision fail_closed_locked(const std::string& name, const std::string& digest,
                                const std::string& reason, const std::string& event);
    void record_locked(const std::string& event, const std::string& name,
                       const std::string& digest, const Decision& decision);

    const classifier::LinearModel* model_;
    const rules::RuleSet* ruleset_;
    PolicyConfig policy_;
    std::ostream* report_sink_;

    mutable std::mutex mutex_;
    std::map<std::string, std::string> pending_methods_;  // id key -> method
    std::map<std::string, Decision> cache_;               // name \x1f digest -> decision
    std::map<std::string, std::string> last_digest_;      // name -> digest
    size_t classification_count_ = 0;
    std::vector<std::string> warnings_;
};

struct ProxyEndpoints {
    std::vector<std::string> server_cmd;  // spawn this process as the server
    std::string tcp_address;              // or connect to host:port
};

/// Relays line-delimited JSON-RPC between stdin/stdout (client side) and the
/// server endpoint, intercepting tools/list results and tools/call requests.
/// Returns 0 when the client closes the session, nonzero when the server side
/// fails or closes first.
int run_proxy(const ProxyEndpoints& endpoints, const classifier::LinearModel* model,
              const rules::RuleSet* ruleset, const PolicyConfig& policy);

}  // namespace gatekeeper::gateway
