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

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "privcot/datasets.hpp"
#include "privcot/errors.hpp"
#include "privcot/token.hpp"

namespace privcot {

// NDJSON frames, one JSON object per line, UTF-8.
//   request:  {"id","tokens":[...],"task","eps"}
//   response: {"id","rationale":[...],"gen","lat_ms"}
//   error:    {"id","error":{"code","msg"}}

struct PromptRequest {
    std::string id;
    std::vector<Token> tokens;  // perturbed tokens only; never the originals
    std::string task;
    double eps = 0.0;
};

struct RationaleResponse {
    std::string id;
    std::vector<Token> rationale;
    std::string generator_id;
    std::int64_t latency_ms = 0;
};

enum WireErrorCode : int {
    wire_malformed = 1,
    wire_invalid_request = 2,
    wire_backend_failure = 3,
};

struct ErrorFrame {
    std::string id;  // empty when the offending frame had no parseable id
    int code = 0;
    std::string message;
};

inline std::string encode_frame(const PromptRequest& r) {
    return Json{{"id", r.id}, {"tokens", tokens_to_json(r.tokens)}, {"task", r.task}, {"eps", r.eps}}
        .dump();
}

inline std::string encode_frame(const RationaleResponse& r) {
    return Json{{"id", r.id},
                {"rationale", tokens_to_json(r.rationale)},
                {"gen", r.generator_id},
                {"lat_ms", r.latency_ms}}
        .dump();
}

inline std::string encode_frame(const ErrorFrame& e) {
    return Json{{"id", e.id}, {"error", Json{{"code", e.code}, {"msg", e.message}}}}.dump();
}

inline PromptRequest parse_request(const std::string& line) {
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("malformed request frame");
    try {
        PromptRequest r;
        r.id = j.at("id").get<std::string>();
        r.tokens = tokens_from_json(j.at("tokens"));
        r.task = j.value("task", "");
        r.eps = j.value("eps", 0.0);
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed request frame: ") + e.what());
    }
}

using ResponseOrError = std::variant<RationaleResponse, ErrorFrame>;

inline ResponseOrError parse_response(const std::string& line) {
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("malformed response frame");
    try {
        if (j.contains("error")) {
            ErrorFrame e;
            e.id = j.value("id", "");
            e.code = j.at("error").value("code", 0);
            e.message = j.at("error").value("msg", "");
            return e;
        }
        RationaleResponse r;
        r.id = j.at("id").get<std::string>();
        r.rationale = tokens_from_json(j.at("rationale"));
        r.generator_id = j.value("gen", "");
        r.latency_ms = j.value("lat_ms", std::int64_t{0});
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed response frame: ") + e.what());
    }
}

}  // namespace privcot
