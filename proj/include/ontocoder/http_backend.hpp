// Copyright 2026 The Ontocoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <regex>
#include <semaphore>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ontocoder/error.hpp"
#include "ontocoder/llm.hpp"

namespace ontocoder {

struct RetryPolicy {
    int max_attempts = 5;
    int initial_delay_ms = 250;
    int max_delay_ms = 8000;
    double jitter = 0.5; // delay is scaled by a uniform factor in [1, 1+jitter]
};

struct HttpBackendConfig {
    /// Full URL of a chat-completions endpoint,
    /// e.g. "https://api.example.com/v1/chat/completions".
    std::string endpoint;
    /// Environment variable holding the bearer credential; empty for none.
    /// Credentials never appear in config files or artifacts.
    std::string credential_env_var;
    int max_in_flight = 4;
    int timeout_seconds = 120;
    RetryPolicy retry;
};

/// Chat-completions HTTP client.
///
/// Sends POST {model, temperature, max_tokens, messages:[{role, content}]}
/// and reads the first choice's message content. Transient failures
/// (timeouts, 429, 5xx) are retried with exponential backoff and jitter up
/// to the configured attempt cap; other HTTP errors fail immediately.
/// Concurrent calls are bounded by max_in_flight.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config)
        : config_(std::move(config)),
          slots_(std::max(1, config_.max_in_flight)) {
        std::regex url_re(R"(^(https?)://([^/:?#]+)(?::(\d+))?(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(config_.endpoint, m, url_re)) {
            throw ValidationError("backend.endpoint is not a valid http(s) URL: " + config_.endpoint);
        }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (m[1] == "https") {
            throw ValidationError("https endpoint requires a TLS-enabled build: " + config_.endpoint);
        }
#endif
        base_ = std::string(m[1]) + "://" + std::string(m[2]);
        if (m[3].matched) base_ += ":" + std::string(m[3]);
        path_ = m[4].matched ? std::string(m[4]) : std::string("/");
        if (!config_.credential_env_var.empty()) {
            const char* v = std::getenv(config_.credential_env_var.c_str());
            if (v == nullptr || *v == '\0') {
                throw ValidationError("credential environment variable '" +
                                      config_.credential_env_var + "' is not set");
            }
            credential_ = v;
        }
    }

    using Backend::complete;

    std::string id() const override { return "http(" + base_ + path_ + ")"; }

    CompletionResponse complete(const CompletionRequest& req, const QueryContext&) override {
        validate_request(req);
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>* s;
            ~Release() { s->release(); }
        } release{&slots_};

        nlohmann::json messages = nlohmann::json::array();
        if (req.system_text) {
            messages.push_back({{"role", "system"}, {"content", *req.system_text}});
        }
        messages.push_back({{"role", "user"}, {"content", req.user_text}});
        const std::string body = nlohmann::json{{"model", req.model_id},
                                                {"temperature", req.temperature},
                                                {"max_tokens", req.max_output_tokens},
                                                {"messages", messages}}
                                     .dump();

        const auto started = std::chrono::steady_clock::now();
        std::string last_error;
        for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
            httplib::Client client(base_);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            httplib::Headers headers;
            if (!credential_.empty()) headers.emplace("Authorization", "Bearer " + credential_);

            auto result = client.Post(path_, headers, body, "application/json");
            if (!result) {
                last_error = "transport error: " + httplib::to_string(result.error());
            } else if (result->status >= 200 && result->status < 300) {
                auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
                return CompletionResponse{extract_content(result->body), id(), false, elapsed};
            } else if (result->status == 429 || result->status >= 500) {
                last_error = "HTTP " + std::to_string(result->status);
            } else {
                throw BackendError("request rejected with HTTP " + std::to_string(result->status) +
                                   " by " + id() + ": " + result->body);
            }
            if (attempt < config_.retry.max_attempts) backoff(attempt);
        }
        throw BackendError("request failed after " + std::to_string(config_.retry.max_attempts) +
                           " attempts to " + id() + " (" + last_error + ")");
    }

private:
    static std::string extract_content(const std::string& body) {
        try {
            nlohmann::json j = nlohmann::json::parse(body);
            const auto& choices = j.at("choices");
            if (!choices.is_array() || choices.empty()) {
                throw BackendError("completion response has no choices");
            }
            const auto& content = choices.at(0).at("message").at("content");
            return content.is_null() ? std::string() : content.get<std::string>();
        } catch (const nlohmann::json::exception& ex) {
            throw BackendError(std::string("malformed completion response: ") + ex.what());
        }
    }

    void backoff(int attempt) {
        double delay = config_.retry.initial_delay_ms * std::pow(2.0, attempt - 1);
        delay = std::min(delay, static_cast<double>(config_.retry.max_delay_ms));
        thread_local std::mt19937_64 rng{std::random_device{}()};
        std::uniform_real_distribution<double> factor(1.0, 1.0 + config_.retry.jitter);
        delay *= factor(rng);
        std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(delay)));
    }

    HttpBackendConfig config_;
    std::string base_;
    std::string path_;
    std::string credential_;
    std::counting_semaphore<> slots_;
};

} // namespace ontocoder
