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
#include <mutex>
#include <string>

#include "privcot/errors.hpp"
#include "privcot/mechanism.hpp"
#include "privcot/transport.hpp"
#include "privcot/wire.hpp"

namespace privcot {

// Client side of the rationale exchange. Builds requests from perturbed
// prompts only — the raw tokens of a PerturbedPrompt are structurally
// unreachable from here. Round trips are serialized, so several pipeline
// workers can share one client over one connection.
class RationaleClient {
public:
    explicit RationaleClient(std::shared_ptr<Transport> transport,
                             std::chrono::milliseconds deadline = std::chrono::milliseconds(5000))
        : transport_(std::move(transport)), deadline_(deadline) {
        if (!transport_) throw ValidationError("transport must not be null");
    }

    RationaleResponse request_rationale(const PerturbedPrompt& perturbed,
                                        const std::string& task_tag) {
        return send(build_request(perturbed, task_tag));
    }

    // Re-sends a previously built request verbatim (same id). The server is
    // stateless, so a retry after reconnect yields a response with that id.
    RationaleResponse send(const PromptRequest& req) {
        std::lock_guard<std::mutex> lock(mutex_);
        transport_->write_line(encode_frame(req));
        std::string line = transport_->read_line(deadline_);
        ResponseOrError parsed = parse_response(line);
        if (auto* err = std::get_if<ErrorFrame>(&parsed))
            throw ServerError(err->code, err->message);
        RationaleResponse resp = std::get<RationaleResponse>(std::move(parsed));
        if (resp.id != req.id)
            throw TransportError("response id '" + resp.id + "' does not match request '" +
                                 req.id + "'");
        return resp;
    }

    PromptRequest build_request(const PerturbedPrompt& perturbed, const std::string& task_tag) {
        if (perturbed.perturbed.empty())
            throw ValidationError("perturbed prompt must be non-empty");
        PromptRequest req;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            req.id = "q" + std::to_string(++counter_);
        }
        req.tokens = perturbed.perturbed;
        req.task = task_tag;
        req.eps = perturbed.epsilon_max();
        return req;
    }

private:
    std::shared_ptr<Transport> transport_;
    std::chrono::milliseconds deadline_;
    std::mutex mutex_;
    std::uint64_t counter_ = 0;
};

}  // namespace privcot
