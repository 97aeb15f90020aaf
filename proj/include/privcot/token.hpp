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

#include <cctype>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "privcot/errors.hpp"

namespace privcot {

// A single lowercased, whitespace-free token.
struct Token {
    std::string text;

    Token() = default;
    explicit Token(std::string t) : text(std::move(t)) {
        for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (text.empty()) throw ValidationError("token must be non-empty");
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c)))
                throw ValidationError("token must not contain whitespace: '" + text + "'");
        }
    }

    bool operator==(const Token& o) const = default;
    auto operator<=>(const Token& o) const = default;
};

inline std::vector<Token> tokens_from_strings(const std::vector<std::string>& v) {
    std::vector<Token> out;
    out.reserve(v.size());
    for (const auto& s : v) out.emplace_back(s);
    return out;
}

inline std::vector<std::string> strings_from_tokens(const std::vector<Token>& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& t : v) out.push_back(t.text);
    return out;
}

inline std::string join_tokens(const std::vector<Token>& v, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i].text;
    }
    return out;
}

// Lowercase, split on whitespace runs, strip surrounding punctuation.
// Pieces that are all punctuation are dropped. Empty input yields an
// empty list. Bytes above ASCII pass through untouched.
inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < n && !is_space(text[i])) ++i;
        if (i == start) break;
        std::size_t lo = start, hi = i;
        while (lo < hi && is_punct(text[lo])) ++lo;
        while (hi > lo && is_punct(text[hi - 1])) --hi;
        if (lo == hi) continue;
        out.emplace_back(std::string(text.substr(lo, hi - lo)));
    }
    return out;
}

// Interface for richer tokenizers; the default is the whitespace rule above.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<Token> operator()(std::string_view text) const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<Token> operator()(std::string_view text) const override { return tokenize(text); }
};

}  // namespace privcot

template <>
struct std::hash<privcot::Token> {
    std::size_t operator()(const privcot::Token& t) const noexcept {
        return std::hash<std::string>{}(t.text);
    }
};
