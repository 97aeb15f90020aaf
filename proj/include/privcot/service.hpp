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
#include <memory>
#include <string>

#include <json.hpp>

#include "privcot/generator.hpp"
#include "privcot/wire.hpp"

namespace privcot {

// The request-handling core shared by the TCP server and the in-process
// loopback transport: one request line in, one response line out. A frame
// that cannot be served still gets an answer; the connection never dies on
// bad input.
class ServerCore {
public:
    explicit ServerCore(std::shared_ptr<GeneratorBackend> backend)
        : backend_(std::move(backend)) {
        if (!backend_) throw ValidationError("backend must not be null");
    }

    const GeneratorBackend& backend() const { return *backend_; }

    std::string handle_line(const std::string& line) const {
        // Salvage the id for the error frame if the line is JSON at all.
        std::string id;
        {
            Json j = Json::parse(line, nullptr, false);
            if (!j.is_discarded() && j.is_object() && j.contains("id") && j.at("id").is_string())
                id = j.at("id").get<std::string>();
        }
        PromptRequest req;
        try {
            req = parse_request(line);
        } catch (const ParseError& e) {
            return encode_frame(ErrorFrame{id, wire_malformed, e.what()});
        }
        if (req.tokens.empty())
            return encode_frame(ErrorFrame{req.id, wire_invalid_request, "empty token list"});
        auto started = std::chrono::steady_clock::now();
        RationaleResponse resp;
        resp.id = req.id;
        resp.generator_id = backend_->id();
        try {
            resp.rationale = backend_->generate(req.tokens);
        } catch (const std::exception& e) {
            return encode_frame(ErrorFrame{req.id, wire_backend_failure, e.what()});
        }
        resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - started)
                              .count();
        return encode_frame(resp);
    }

private:
    std::shared_ptr<GeneratorBackend> backend_;
};

}  // namespace privcot
