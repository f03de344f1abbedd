// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include "gatekeeper/gateway.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstring>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "gatekeeper/error.hpp"
#include "gatekeeper/rng.hpp"
#include "gatekeeper/text.hpp"

namespace gatekeeper::gateway {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Action action) {
    switch (action) {
        case Action::Allow: return "allow";
        case Action::Block: return "block";
        case Action::Flag: return "flag";
    }
    return "block";
}

void PolicyConfig::validate() const {
    for (const auto& name : allowlist)
        if (denylist.count(name))
            throw Error(ErrorKind::Policy,
                        "tool \"" + name + "\" appears in both allowlist and denylist");
}

namespace {

Action action_from(const std::string& s, const std::string& context) {
    if (s == "allow") return Action::Allow;
    if (s == "block") return Action::Block;
    if (s == "flag") return Action::Flag;
    throw Error(ErrorKind::Parse, context + ": unknown action \"" + s + "\"");
}

bool bool_from(const std::string& s, const std::string& context) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error(ErrorKind::Parse, context + ": expected a boolean, got \"" + s + "\"");
}

std::set<std::string> name_set_from(const std::string& s) {
    std::set<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string trimmed = text::trim(item);
        if (!trimmed.empty()) out.insert(trimmed);
    }
    return out;
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

}  // namespace

PolicyConfig parse_policy(std::string_view content) {
    PolicyConfig policy;
    std::istringstream in{std::string(content)};
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Parse,
                        "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = text::trim(trimmed.substr(0, eq));
        const std::string value = text::trim(trimmed.substr(eq + 1));
        const std::string context = "line " + std::to_string(line_no);
        if (key == "action_on_malicious") policy.action_on_malicious = action_from(value, context);
        else if (key == "use_rules") policy.use_rules = bool_from(value, context);
        else if (key == "use_model") policy.use_model = bool_from(value, context);
        else if (key == "denylist") policy.denylist = name_set_from(value);
        else if (key == "allowlist") policy.allowlist = name_set_from(value);
        else if (key == "log_path") policy.log_path = value;
        else
            throw Error(ErrorKind::Parse, context + ": unknown policy key \"" + key + "\"");
    }
    policy.validate();
    return policy;
}

PolicyConfig load_policy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open policy file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_policy(buffer.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

// --- session ----------------------------------------------------------------

Session::Session(const classifier::LinearModel* model, const rules::RuleSet* ruleset,
                 PolicyConfig policy, std::ostream* report_sink)
    : model_(model), ruleset_(ruleset), policy_(std::move(policy)), report_sink_(report_sink) {
    policy_.validate();
}

void Session::record_locked(const std::string& event, const std::string& name,
                            const std::string& digest, const Decision& decision) {
    if (!report_sink_) return;
    ordered_json row;
    row["timestamp"] = iso8601_now();
    row["event"] = event;
    row["tool"] = name;
    row["digest"] = digest;
    row["verdict"] = decision.verdict;
    row["predicted_class"] = decision.predicted_class;
    row["action"] = to_string(decision.action);
    row["reason"] = decision.reason;
    row["matched_rules"] = decision.matched_rules;
    ordered_json attributions = ordered_json::array();
    for (const auto& a : decision.attributions)
        attributions.push_back({{"token", a.token}, {"contribution", a.contribution}});
    row["attributions"] = std::move(attributions);
    (*report_sink_) << row.dump() << "\n";
    report_sink_->flush();
}

Decision Session::fail_closed_locked(const std::string& name, const std::string& digest,
                                     const std::string& reason, const std::string& event) {
    Decision decision;
    decision.verdict = "malicious";
    decision.action = Action::Block;
    decision.reason = "fail-closed: " + reason;
    ++classification_count_;
    record_locked(event, name, digest, decision);
    return decision;
}

Decision Session::classify_locked(const std::string& name, const std::string& description,
                                  const std::string& digest) {
    const std::string key = name + "\x1f" + digest;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const bool rug_pull =
        last_digest_.count(name) != 0 && last_digest_.at(name) != digest;
    const std::string event = rug_pull ? "rug-pull" : "classify";
    last_digest_[name] = digest;

    Decision decision;
    try {
        if (policy_.denylist.count(name)) {
            decision.verdict = "malicious";
            decision.action = Action::Block;
            decision.reason = "denylist";
        } else if (policy_.allowlist.count(name)) {
            decision.verdict = "benign";
            decision.action = Action::Allow;
            decision.reason = "allowlist";
        } else {
            if (!policy_.use_rules && !policy_.use_model) {
                decision = fail_closed_locked(name, digest, "no classification engine configured",
                                              event);
                cache_[key] = decision;
                return decision;
            }
            bool malicious = false;
            std::vector<std::string> reasons;
            if (policy_.use_rules) {
                if (!ruleset_) throw Error(ErrorKind::Precondition, "rule set not loaded");
                for (const auto& match : rules::scan(description, *ruleset_)) {
                    decision.matched_rules.push_back(match.rule);
                    if (match.severity != rules::Severity::Info) malicious = true;
                }
                if (!decision.matched_rules.empty())
                    reasons.push_back("rules:" + std::to_string(decision.matched_rules.size()));
            }
            if (policy_.use_model) {
                if (!model_) throw Error(ErrorKind::Precondition, "model not loaded");
                const classifier::Verdict verdict = classifier::predict(description, *model_);
                decision.predicted_class = verdict.predicted_class;
                decision.attributions = classifier::attribute(description, *model_, 5);
                if (verdict.binary == "malicious") {
                    malicious = true;
                    reasons.push_back("model:" + verdict.predicted_class);
                }
            }
            decision.verdict = malicious ? "malicious" : "benign";
            decision.action = malicious ? policy_.action_on_malicious : Action::Allow;
            decision.reason = reasons.empty() ? (malicious ? "engine" : "clean") : [&] {
                std::string joined;
                for (const auto& r : reasons) joined += (joined.empty() ? "" : "; ") + r;
                return joined;
            }();
        }
    } catch (const std::exception& e) {
        decision = fail_closed_locked(name, digest, e.what(), event);
        cache_[key] = decision;
        return decision;
    }

    ++classification_count_;
    record_locked(event, name, digest, decision);
    cache_[key] = decision;
    return decision;
}

Decision Session::classify_tool(const std::string& name, const std::string& description) {
    std::lock_guard<std::mutex> lock(mutex_);
    return classify_locked(name, description, fnv1a64_hex(description));
}

size_t Session::classification_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return classification_count_;
}

std::vector<std::string> Session::warnings() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return warnings_;
}

Session::Outcome Session::on_client_line(const std::string& line) {
    std::lock_guard<std::mutex> lock(mutex_);
    Outcome outcome;

    ordered_json msg = ordered_json::parse(line, nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || !msg.contains("method")) {
        outcome.to_server.push_back(line);  // responses and noise relay untouched
        return outcome;
    }
    const std::string method = msg["method"].is_string() ? msg["method"].get<std::string>() : "";
    if (msg.contains("id")) pending_methods_[msg["id"].dump()] = method;

    if (method != "tools/call" || !msg.contains("params") || !msg["params"].is_object() ||
        !msg["params"].contains("name") || !msg["params"]["name"].is_string()) {
        outcome.to_server.push_back(line);
        return outcome;
    }

    const std::string name = msg["params"]["name"].get<std::string>();
    Decision decision;
    if (auto digest_it = last_digest_.find(name); digest_it != last_digest_.end()) {
        const std::string key = name + "\x1f" + digest_it->second;
        decision = cache_.at(key);
    } else {
        decision = fail_closed_locked(name, "", "tool \"" + name + "\" was never listed",
                                      "call-unknown");
        cache_[name + std::string("\x1f")] = decision;
        last_digest_[name] = "";
    }

    if (decision.action != Action::Block) {
        outcome.to_server.push_back(line);
        return outcome;
    }

    // reject: answer the client ourselves, never reaches the server
    ordered_json error_response;
    error_response["jsonrpc"] = "2.0";
    error_response["id"] = msg.contains("id") ? msg["id"] : ordered_json(nullptr);
    error_response["error"] = {
        {"code", kBlockedErrorCode},
        {"message", kBlockedErrorMessage},
        {"data",
         {{"tool", name}, {"verdict", decision.verdict}, {"predicted_class", decision.predicted_class}}}};
    if (msg.contains("id")) pending_methods_.erase(msg["id"].dump());
    outcome.to_client.push_back(error_response.dump());
    return outcome;
}

Session::Outcome Session::on_server_line(const std::string& line) {
    std::lock_guard<std::mutex> lock(mutex_);
    Outcome outcome;

    ordered_json msg = ordered_json::parse(line, nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || msg.contains("method") || !msg.contains("id")) {
        outcome.to_client.push_back(line);  // requests/notifications/noise relay untouched
        return outcome;
    }

    const std::string id_key = msg["id"].dump();
    auto pending = pending_methods_.find(id_key);
    const std::string method = pending == pending_methods_.end() ? "" : pending->second;
    if (pending != pending_methods_.end()) pending_methods_.erase(pending);

    if (method != "tools/list") {
        outcome.to_client.push_back(line);
        return outcome;
    }
    if (!msg.contains("result") || !msg["result"].is_object() ||
        !msg["result"].contains("tools") || !msg["result"]["tools"].is_array()) {
        warnings_.push_back("tools/list response " + id_key + " has no tools array; forwarded as-is");
        outcome.to_client.push_back(line);
        return outcome;
    }

    ordered_json filtered = ordered_json::array();
    bool changed = false;
    bool malformed = false;
    for (auto& tool : msg["result"]["tools"]) {
        if (!tool.is_object() || !tool.contains("name") || !tool["name"].is_string()) {
            malformed = true;
            filtered.push_back(tool);
            continue;
        }
        const std::string name = tool["name"].get<std::string>();
        const std::string description =
            tool.contains("description") && tool["description"].is_string()
                ? tool["description"].get<std::string>()
                : "";
        const Decision decision = classify_locked(name, description, fnv1a64_hex(description));
        if (decision.action == Action::Block) {
            changed = true;  // drop the entry from the forwarded list
            continue;
        }
        filtered.push_back(tool);
    }
    if (malformed)
        warnings_.push_back("tools/list response " + id_key + " contains malformed tool entries");

    if (!changed) {
        outcome.to_client.push_back(line);  // byte-identical when untouched
        return outcome;
    }
    msg["result"]["tools"] = std::move(filtered);
    outcome.to_client.push_back(msg.dump());
    return outcome;
}

// --- proxy transport ---------------------------------------------------------

namespace {

struct FdLineReader {
    int fd;
    std::string buffer;
    bool eof = false;

    /// Next LF-terminated line; polls in `timeout_ms` slices and gives up when
    /// `cancel` returns true. nullopt on EOF/cancel.
    std::optional<std::string> next_line(int timeout_ms, const std::function<bool()>& cancel) {
        for (;;) {
            const size_t nl = buffer.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                buffer.erase(0, nl + 1);
                return line;
            }
            if (eof) {
                if (buffer.empty()) return std::nullopt;
                std::string line = std::move(buffer);
                buffer.clear();
                return line;
            }
            if (cancel && cancel()) return std::nullopt;

            pollfd pfd{fd, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, timeout_ms);
            if (ready < 0) {
                if (errno == EINTR) continue;
                eof = true;
                continue;
            }
            if (ready == 0) continue;
            char chunk[4096];
            const ssize_t n = ::read(fd, chunk, sizeof(chunk));
            if (n <= 0) {
                eof = true;
                continue;
            }
            buffer.append(chunk, static_cast<size_t>(n));
        }
    }
};

bool write_all(int fd, std::string_view bytes) {
    size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n <= 0) return false;
        done += static_cast<size_t>(n);
    }
    return true;
}

struct ServerTransport {
    int in_fd = -1;   // proxy writes to the server here
    int out_fd = -1;  // proxy reads server output here
    pid_t child = -1;
    bool is_socket = false;

    void close_input() {
        if (in_fd < 0) return;
        if (is_socket) ::shutdown(in_fd, SHUT_WR);
        else ::close(in_fd);
        in_fd = -1;
    }

    ~ServerTransport() {
        if (in_fd >= 0 && !is_socket) ::close(in_fd);
        if (out_fd >= 0 && (!is_socket || in_fd < 0)) ::close(out_fd);
        if (child > 0) {
            int status = 0;
            if (waitpid(child, &status, WNOHANG) == 0) {
                ::kill(child, SIGTERM);
                waitpid(child, &status, 0);
            }
        }
    }
};

ServerTransport spawn_server(const std::vector<std::string>& argv_strings) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw Error(ErrorKind::Io, "pipe() failed for the server process");
    const pid_t pid = fork();
    if (pid < 0) throw Error(ErrorKind::Io, "fork() failed for the server process");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        std::vector<char*> argv;
        argv.reserve(argv_strings.size() + 1);
        for (const auto& arg : argv_strings) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ServerTransport transport;
    transport.in_fd = to_child[1];
    transport.out_fd = from_child[0];
    transport.child = pid;
    return transport;
}

ServerTransport connect_tcp(const std::string& address) {
    const size_t colon = address.rfind(':');
    if (colon == std::string::npos)
        throw Error(ErrorKind::Input, "tcp address must be host:port, got \"" + address + "\"");
    const std::string host = address.substr(0, colon);
    const std::string port = address.substr(colon + 1);

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* results = nullptr;
    if (getaddrinfo(host.c_str(), port.c_str(), &hints, &results) != 0 || !results)
        throw Error(ErrorKind::Io, "cannot resolve " + address);

    int fd = -1;
    for (addrinfo* r = results; r; r = r->ai_next) {
        fd = ::socket(r->ai_family, r->ai_socktype, r->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, r->ai_addr, r->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(results);
    if (fd < 0) throw Error(ErrorKind::Io, "cannot connect to " + address);

    ServerTransport transport;
    transport.in_fd = fd;
    transport.out_fd = fd;
    transport.is_socket = true;
    return transport;
}

}  // namespace

int run_proxy(const ProxyEndpoints& endpoints, const classifier::LinearModel* model,
              const rules::RuleSet* ruleset, const PolicyConfig& policy) {
    std::signal(SIGPIPE, SIG_IGN);

    ServerTransport server = endpoints.server_cmd.empty()
                                 ? connect_tcp(endpoints.tcp_address)
                                 : spawn_server(endpoints.server_cmd);

    std::ofstream report;
    if (!policy.log_path.empty()) {
        report.open(policy.log_path, std::ios::app | std::ios::binary);
        if (!report) throw Error(ErrorKind::Io, "cannot open report log " + policy.log_path);
    }
    Session session(model, ruleset, policy, report.is_open() ? &report : nullptr);

    std::mutex stdout_mutex;
    auto send_to_client = [&](const std::string& line) {
        std::lock_guard<std::mutex> lock(stdout_mutex);
        write_all(STDOUT_FILENO, line + "\n");
    };

    std::atomic<bool> server_closed{false};
    std::atomic<bool> shutting_down{false};
    std::atomic<bool> transport_error{false};

    std::thread server_reader([&] {
        FdLineReader reader{server.out_fd};
        for (;;) {
            auto line = reader.next_line(100, [&] { return shutting_down.load(); });
            if (!line) break;
            const Session::Outcome outcome = session.on_server_line(*line);
            for (const auto& out : outcome.to_client) send_to_client(out);
        }
        server_closed.store(true);
    });

    bool client_closed_first = false;
    {
        FdLineReader client{STDIN_FILENO};
        for (;;) {
            if (server_closed.load()) break;
            auto line = client.next_line(100, [&] { return server_closed.load(); });
            if (!line) {
                if (!server_closed.load()) client_closed_first = true;
                break;
            }
            const Session::Outcome outcome = session.on_client_line(*line);
            for (const auto& out : outcome.to_client) send_to_client(out);
            for (const auto& out : outcome.to_server) {
                if (!write_all(server.in_fd, out + "\n")) {
                    transport_error.store(true);
                    break;
                }
            }
            if (transport_error.load()) break;
        }
    }

    // drain: let the server finish, then stop the reader thread
    server.close_input();
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    while (!server_closed.load() && std::chrono::steady_clock::now() < deadline)
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    shutting_down.store(true);
    server_reader.join();

    if (report.is_open()) report.flush();
    return (client_closed_first && !transport_error.load()) ? 0 : 1;
}

}  // namespace gatekeeper::gateway
