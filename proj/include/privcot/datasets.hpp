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

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "privcot/errors.hpp"
#include "privcot/token.hpp"

namespace privcot {

using Json = nlohmann::json;

// Encoder training pair: a prompt and its mechanism-perturbed counterpart.
struct EncoderPair {
    std::vector<Token> prompt;
    std::vector<Token> perturbed;
    double epsilon = 0.0;
};

// Decoder training example: everything the client knows about one exchange.
struct DecoderExample {
    std::vector<Token> prompt;
    std::vector<Token> perturbed_prompt;
    std::vector<Token> perturbed_rationale;
    std::vector<Token> rationale;
};

// Like DecoderExample but before the decoded rationale exists.
struct DecoderQuery {
    std::vector<Token> prompt;
    std::vector<Token> perturbed_prompt;
    std::vector<Token> perturbed_rationale;
};

// Task-specific training example. `label_only` is set when rationale
// generation failed and the example degraded to plain label supervision.
struct DistillExample {
    std::vector<Token> input;
    std::vector<Token> label;
    std::vector<Token> rationale;
    bool label_only = false;
};

struct SkipRecord {
    std::size_t index = 0;
    std::string reason;
};

template <typename T>
struct BuildResult {
    std::vector<T> items;
    std::vector<SkipRecord> skips;
};

inline Json tokens_to_json(const std::vector<Token>& v) {
    Json arr = Json::array();
    for (const auto& t : v) arr.push_back(t.text);
    return arr;
}

inline std::vector<Token> tokens_from_json(const Json& arr) {
    if (!arr.is_array()) throw ParseError("expected a JSON array of tokens");
    std::vector<Token> out;
    out.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_string()) throw ParseError("token entries must be strings");
        out.emplace_back(e.get<std::string>());
    }
    return out;
}

inline Json to_json(const EncoderPair& p) {
    return Json{{"prompt", tokens_to_json(p.prompt)},
                {"perturbed", tokens_to_json(p.perturbed)},
                {"epsilon", p.epsilon}};
}

inline Json to_json(const DecoderExample& e) {
    return Json{{"prompt", tokens_to_json(e.prompt)},
                {"perturbed_prompt", tokens_to_json(e.perturbed_prompt)},
                {"perturbed_rationale", tokens_to_json(e.perturbed_rationale)},
                {"rationale", tokens_to_json(e.rationale)}};
}

inline Json to_json(const DistillExample& e) {
    return Json{{"input", tokens_to_json(e.input)},
                {"label", tokens_to_json(e.label)},
                {"rationale", tokens_to_json(e.rationale)},
                {"label_only", e.label_only}};
}

inline EncoderPair encoder_pair_from_json(const Json& j) {
    return EncoderPair{tokens_from_json(j.at("prompt")), tokens_from_json(j.at("perturbed")),
                       j.at("epsilon").get<double>()};
}

inline DecoderExample decoder_example_from_json(const Json& j) {
    return DecoderExample{tokens_from_json(j.at("prompt")),
                          tokens_from_json(j.at("perturbed_prompt")),
                          tokens_from_json(j.at("perturbed_rationale")),
                          tokens_from_json(j.at("rationale"))};
}

inline DistillExample distill_example_from_json(const Json& j) {
    DistillExample e{tokens_from_json(j.at("input")), tokens_from_json(j.at("label")),
                     tokens_from_json(j.at("rationale")), j.value("label_only", false)};
    // Rationale may be empty only for label-only rows.
    if (e.rationale.empty() && !e.label_only)
        throw ParseError("empty rationale on a row not flagged label_only");
    return e;
}

// One JSON object per line, LF-terminated, UTF-8.
template <typename T>
void write_jsonl(const std::vector<T>& items, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    for (const auto& item : items) out << to_json(item).dump() << '\n';
    if (!out) throw ValidationError("write failed: " + path);
}

template <typename T>
std::vector<T> read_jsonl(const std::string& path, T (*parse)(const Json&)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + path);
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("invalid JSON", lineno);
        try {
            out.push_back(parse(j));
        } catch (const Json::exception& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return out;
}

}  // namespace privcot
