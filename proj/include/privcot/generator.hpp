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
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "privcot/token.hpp"

namespace privcot {

// A rationale generator as seen from the server side: turns a (perturbed)
// prompt into a rationale token list. Implementations only ever see what
// the wire carries; nothing client-private reaches them.
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual std::string id() const = 0;
    virtual std::vector<Token> generate(const std::vector<Token>& prompt) = 0;
    // Whether generate() may be called from several threads at once.
    virtual bool thread_safe() const { return false; }
};

// Deterministic template generator: picks the content words out of the
// prompt and weaves them into fixed scaffolding. Two rationales share
// exactly the scaffold plus whatever content words their prompts share,
// which makes rationale overlap a monotone function of prompt overlap —
// the property the TokenRatio trend harnesses depend on.
class MockGenerator final : public GeneratorBackend {
public:
    explicit MockGenerator(std::uint64_t seed = 0) : seed_(seed) {
        static const char* kConnectives[] = {"and", "plus", "alongside"};
        connective_ = kConnectives[seed % 3];
        for (const char* w :
             {"the", "answer", "must", "relate", "to", "because", "they", "appear", "together",
              "nothing", "specific", "stands", "out", "and", "plus", "alongside"})
            scaffold_.insert(w);
    }

    std::string id() const override { return "mock-" + std::to_string(seed_); }
    bool thread_safe() const override { return true; }

    std::vector<Token> generate(const std::vector<Token>& prompt) override {
        std::vector<Token> content;
        std::unordered_set<std::string> seen;
        for (const auto& t : prompt) {
            if (scaffold_.count(t.text)) continue;
            if (seen.insert(t.text).second) content.push_back(t);
        }
        std::vector<Token> out;
        for (const char* w : {"the", "answer", "must", "relate", "to"}) out.emplace_back(w);
        if (content.empty()) {
            for (const char* w : {"nothing", "specific", "because", "nothing", "stands", "out"})
                out.emplace_back(w);
            return out;
        }
        for (std::size_t i = 0; i < content.size(); ++i) {
            if (i) out.emplace_back(connective_);
            out.push_back(content[i]);
        }
        for (const char* w : {"because", "they", "appear", "together"}) out.emplace_back(w);
        return out;
    }

private:
    std::uint64_t seed_;
    std::string connective_;
    std::unordered_set<std::string> scaffold_;
};

inline std::shared_ptr<GeneratorBackend> make_mock_generator(std::uint64_t seed = 0) {
    return std::make_shared<MockGenerator>(seed);
}

}  // namespace privcot
