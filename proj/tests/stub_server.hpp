// SPDX-License-Identifier: Apache-2.0
//
// In-process HTTP stub scripting a sequence of behaviors per request:
// respond with a status, return a completion, or stall past the client
// timeout. Used by the evaluator transport tests and the acceptance suite.
#ifndef PROMPT_ELITES_TEST_STUB_SERVER_HPP
#define PROMPT_ELITES_TEST_STUB_SERVER_HPP

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace stub_server {

struct Step {
    int status = 200;          // HTTP status to return (ignored if stall)
    std::string completion;    // generated_text payload for 200s
    int stall_ms = 0;          // sleep before answering (to trip timeouts)
};

class ScriptedServer {
public:
    explicit ScriptedServer(std::vector<Step> script, std::string default_completion = "Yes")
        : script_(std::move(script)), default_completion_(std::move(default_completion)) {
        server_.Post("/generate", [this](const httplib::Request&, httplib::Response& res) {
            Step step;
            {
                std::lock_guard lock(mutex_);
                const std::size_t i = request_count_++;
                step = i < script_.size() ? script_[i] : Step{200, default_completion_, 0};
            }
            if (step.stall_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(step.stall_ms));
            if (step.status == 200) {
                nlohmann::json body = nlohmann::json::array();
                body.push_back({{"generated_text", step.completion.empty() ? default_completion_
                                                                           : step.completion}});
                res.set_content(body.dump(), "application/json");
            } else {
                res.status = step.status;
                res.set_content("scripted failure", "text/plain");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~ScriptedServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/generate";
    }
    std::size_t request_count() {
        std::lock_guard lock(mutex_);
        return request_count_;
    }

private:
    httplib::Server server_;
    std::vector<Step> script_;
    std::string default_completion_;
    std::mutex mutex_;
    std::size_t request_count_ = 0;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace stub_server

#endif
