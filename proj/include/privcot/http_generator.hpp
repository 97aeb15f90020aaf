// Copyright 2026 The privcot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "privcot/errors.hpp"
#include "privcot/generator.hpp"
#include "privcot/token.hpp"

namespace privcot {

struct HttpGeneratorOptions {
    std::size_t max_attempts = 3;  // total tries on 429 before giving up
    std::chrono::milliseconds backoff_base{100};
    std::chrono::milliseconds timeout{5000};
};

// Adapter for a real text-generation service. Sends the perturbed prompt
// wrapped in a chain-of-thought instruction, expects {"text": "..."} back,
// retries 429s with exponential backoff. The API key is read from the
// named environment variable at construction — never from flags or files —
// and a missing variable fails before any network traffic.
class HttpGenerator final : public GeneratorBackend {
public:
    HttpGenerator(const std::string& endpoint_url, const std::string& api_key_env,
                  HttpGeneratorOptions options = {})
        : options_(options) {
        const char* key = std::getenv(api_key_env.c_str());
        if (!key || !*key)
            throw ValidationError("environment variable not set: " + api_key_env);
        api_key_ = key;
        parse_url(endpoint_url);
    }

    std::string id() const override { return "http:" + host_ + path_; }
    bool thread_safe() const override { return false; }  // single-flight

    std::vector<Token> generate(const std::vector<Token>& prompt) override {
        std::lock_guard<std::mutex> lock(mutex_);
        nlohmann::json body{{"instruction", "think step by step and give a rationale"},
                            {"prompt", join_tokens(prompt)}};
        httplib::Client client(host_, port_);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
        std::string payload = body.dump();

        for (std::size_t attempt = 1;; ++attempt) {
            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res) throw TransportError("http request failed: " + to_string(res.error()));
            if (res->status == 429) {
                if (attempt >= options_.max_attempts)
                    throw HttpError("rate limited after " + std::to_string(attempt) + " attempts");
                std::this_thread::sleep_for(options_.backoff_base * (1u << (attempt - 1)));
                continue;
            }
            if (res->status < 200 || res->status >= 300)
                throw HttpError("http status " + std::to_string(res->status));
            nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("text") ||
                !j.at("text").is_string())
                throw HttpError("response schema mismatch: expected {\"text\": ...}");
            return tokenize(j.at("text").get<std::string>());
        }
    }

private:
    void parse_url(const std::string& url) {
        const std::string scheme = "http://";
        if (url.rfind(scheme, 0) != 0)
            throw ValidationError("endpoint must be an http:// URL: " + url);
        std::string rest = url.substr(scheme.size());
        auto slash = rest.find('/');
        std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
        auto colon = hostport.find(':');
        if (colon == std::string::npos) {
            host_ = hostport;
            port_ = 80;
        } else {
            host_ = hostport.substr(0, colon);
            port_ = std::stoi(hostport.substr(colon + 1));
        }
        if (host_.empty()) throw ValidationError("endpoint has no host: " + url);
    }

    HttpGeneratorOptions options_;
    std::string api_key_;
    std::string host_;
    int port_ = 80;
    std::string path_;
    std::mutex mutex_;
};

inline std::shared_ptr<GeneratorBackend> make_http_generator(const std::string& endpoint_url,
                                                             const std::string& api_key_env,
                                                             HttpGeneratorOptions options = {}) {
    return std::make_shared<HttpGenerator>(endpoint_url, api_key_env, options);
}

}  // namespace privcot
