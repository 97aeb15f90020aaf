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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "privcot/errors.hpp"
#include "privcot/token.hpp"

namespace privcot {

// Immutable vocabulary of tokens with unit-normalized embedding vectors.
// Token indices are stable for the lifetime of a loaded table; reads are
// safe from any number of threads.
class EmbeddingTable {
public:
    EmbeddingTable() = default;

    static EmbeddingTable from_rows(std::vector<std::pair<std::string, std::vector<double>>> rows) {
        EmbeddingTable t;
        for (auto& [tok, vec] : rows) t.add_row(Token(std::move(tok)), vec, 0);
        return t;
    }

    std::size_t size() const { return tokens_.size(); }
    std::size_t dim() const { return dim_; }

    bool contains(const Token& t) const { return index_.count(t.text) != 0; }

    std::optional<std::size_t> index_of(const Token& t) const {
        auto it = index_.find(t.text);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t require_index(const Token& t) const {
        auto idx = index_of(t);
        if (!idx) throw OutOfVocabularyError("token not in vocabulary: '" + t.text + "'");
        return *idx;
    }

    const Token& token_at(std::size_t i) const { return tokens_[i]; }
    const std::vector<Token>& tokens() const { return tokens_; }

    std::span<const double> vec(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

    double cosine(std::size_t i, std::size_t j) const {
        const double* a = data_.data() + i * dim_;
        const double* b = data_.data() + j * dim_;
        double dot = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) dot += a[k] * b[k];
        return std::clamp(dot, -1.0, 1.0);
    }

    // Used by load_embeddings and the synthetic generators. Normalizes the
    // vector; rejects duplicates, dimension mismatches and zero vectors.
    void add_row(Token token, std::vector<double> vec, std::size_t line) {
        if (vec.empty()) throw ParseError("empty vector for token '" + token.text + "'", line);
        if (dim_ == 0) {
            dim_ = vec.size();
        } else if (vec.size() != dim_) {
            throw ParseError("expected " + std::to_string(dim_) + " values, got " +
                                 std::to_string(vec.size()),
                             line);
        }
        if (index_.count(token.text))
            throw DuplicateTokenError("duplicate token: '" + token.text + "'");
        double norm2 = 0.0;
        for (double v : vec) {
            if (!std::isfinite(v)) throw ParseError("non-finite value for token '" + token.text + "'", line);
            norm2 += v * v;
        }
        double norm = std::sqrt(norm2);
        if (norm < 1e-12)
            throw DegenerateVectorError("zero-norm vector for token: '" + token.text + "'");
        // Already-unit vectors keep their bits so save/load round-trips exactly.
        if (std::abs(norm - 1.0) > 1e-12)
            for (double& v : vec) v /= norm;
        index_.emplace(token.text, tokens_.size());
        tokens_.push_back(std::move(token));
        data_.insert(data_.end(), vec.begin(), vec.end());
    }

private:
    std::vector<Token> tokens_;
    std::vector<double> data_;  // size() x dim(), row-major
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t dim_ = 0;
};

// Loads a GloVe-style plain-text embedding file: one record per line,
// `token v1 v2 ... vd`, space-separated decimals, UTF-8, LF endings.
// Vectors are unit-normalized on the way in. Blank lines are skipped.
inline EmbeddingTable load_embeddings(const std::string& path,
                                      std::optional<std::size_t> expected_dim = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open embeddings file: " + path);
    EmbeddingTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        std::vector<double> vec;
        double v;
        while (ss >> v) vec.push_back(v);
        if (!ss.eof()) throw ParseError("non-numeric value after token '" + tok + "'", lineno);
        if (vec.empty()) throw ParseError("no values after token '" + tok + "'", lineno);
        if (expected_dim && vec.size() != *expected_dim)
            throw ParseError("expected " + std::to_string(*expected_dim) + " values, got " +
                                 std::to_string(vec.size()),
                             lineno);
        Token token;
        try {
            token = Token(tok);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), lineno);
        }
        table.add_row(std::move(token), std::move(vec), lineno);
    }
    if (table.size() == 0) throw ParseError("embeddings file has no records");
    return table;
}

// Writes the table in the same format, 17 significant digits so a reload
// reproduces every vector bit-for-bit.
inline void save_embeddings(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.token_at(i).text;
        for (double v : table.vec(i)) out << ' ' << v;
        out << '\n';
    }
    if (!out) throw ValidationError("write failed: " + path);
}

// Cosine similarity rescaled to [0, 1]: u'(x, y) = (cos(v_x, v_y) + 1) / 2.
// The rescale pins the mechanism's utility sensitivity to exactly 1.
inline double scaled_utility(const EmbeddingTable& table, const Token& x, const Token& y) {
    std::size_t i = table.require_index(x);
    std::size_t j = table.require_index(y);
    return (table.cosine(i, j) + 1.0) / 2.0;
}

inline double scaled_utility_by_index(const EmbeddingTable& table, std::size_t i, std::size_t j) {
    return (table.cosine(i, j) + 1.0) / 2.0;
}

}  // namespace privcot
