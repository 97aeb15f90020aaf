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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "privcot/embedding.hpp"
#include "privcot/errors.hpp"
#include "privcot/rng.hpp"
#include "privcot/token.hpp"

namespace privcot {

// Vocabulary of `n_clusters * per_cluster` tokens named tok0, tok1, ...
// Cluster c sits around basis vector e_c; `spread` controls how tight the
// cluster is (members ~ normalize(e_c + spread * gauss)). Tokens in the
// same cluster end up with high scaled utility, tokens across clusters
// near 0.5 — the geometry every privacy-utility harness here relies on.
inline EmbeddingTable make_clustered_table(std::size_t n_clusters, std::size_t per_cluster,
                                           std::size_t dim, double spread, std::uint64_t seed,
                                           const std::string& prefix = "tok") {
    if (n_clusters == 0 || per_cluster == 0) throw ValidationError("empty cluster spec");
    if (n_clusters > dim) throw ValidationError("need dim >= n_clusters for orthogonal centers");
    Rng rng(derive_seed(seed, 0x5e1f));
    EmbeddingTable table;
    std::size_t id = 0;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        for (std::size_t m = 0; m < per_cluster; ++m) {
            std::vector<double> v(dim, 0.0);
            v[c] = 1.0;
            for (std::size_t k = 0; k < dim; ++k) v[k] += spread * rng.next_gaussian();
            table.add_row(Token(prefix + std::to_string(id++)), std::move(v), 0);
        }
    }
    return table;
}

// Small vocabulary of well-separated tokens: random unit vectors redrawn
// until every pairwise cosine is below `max_cosine`. Used wherever a test
// needs "self is the clear utility maximizer" (identity limits, DP bound
// fixtures).
inline EmbeddingTable make_separated_table(std::size_t n_tokens, std::size_t dim,
                                           std::uint64_t seed, double max_cosine = 0.6,
                                           const std::string& prefix = "w") {
    if (n_tokens == 0 || dim == 0) throw ValidationError("empty table spec");
    Rng rng(derive_seed(seed, 0xface));
    std::vector<std::vector<double>> rows;
    std::size_t attempts = 0;
    while (rows.size() < n_tokens) {
        if (++attempts > 10000 * n_tokens)
            throw ValidationError("could not generate separated vectors; lower max_cosine or raise dim");
        std::vector<double> v(dim);
        double norm2 = 0.0;
        for (auto& x : v) {
            x = rng.next_gaussian();
            norm2 += x * x;
        }
        double norm = std::sqrt(norm2);
        if (norm < 1e-9) continue;
        for (auto& x : v) x /= norm;
        bool ok = true;
        for (const auto& r : rows) {
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += r[k] * v[k];
            if (std::abs(dot) > max_cosine) {
                ok = false;
                break;
            }
        }
        if (ok) rows.push_back(std::move(v));
    }
    EmbeddingTable table;
    for (std::size_t i = 0; i < rows.size(); ++i)
        table.add_row(Token(prefix + std::to_string(i)), std::move(rows[i]), 0);
    return table;
}

// The 3-token fixture with u'(a,a)=1, u'(a,b)=0.5, u'(a,c)=0: a=(1,0),
// b=(0,1), c=(-1,0).
inline EmbeddingTable make_triangle_table() {
    return EmbeddingTable::from_rows({{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}, {"c", {-1.0, 0.0}}});
}

// Prompts drawn from one cluster each: prompt i uses `words_per_prompt`
// distinct tokens of cluster (i mod n_clusters). Matches make_clustered_table
// naming, so in-cluster replacements often land on another word of the same
// prompt — the knob that gives TokenRatio its epsilon trend.
inline std::vector<std::vector<Token>> make_cluster_prompts(std::size_t n_clusters,
                                                            std::size_t per_cluster,
                                                            std::size_t n_prompts,
                                                            std::size_t words_per_prompt,
                                                            std::uint64_t seed,
                                                            const std::string& prefix = "tok") {
    if (words_per_prompt > per_cluster)
        throw ValidationError("words_per_prompt must be <= per_cluster");
    std::vector<std::vector<Token>> prompts;
    prompts.reserve(n_prompts);
    for (std::size_t i = 0; i < n_prompts; ++i) {
        std::size_t cluster = i % n_clusters;
        std::vector<std::size_t> members(per_cluster);
        for (std::size_t m = 0; m < per_cluster; ++m) members[m] = cluster * per_cluster + m;
        Rng rng = Rng::stream(seed, i);
        rng.shuffle(members);
        std::vector<Token> prompt;
        for (std::size_t w = 0; w < words_per_prompt; ++w)
            prompt.emplace_back(prefix + std::to_string(members[w]));
        prompts.push_back(std::move(prompt));
    }
    return prompts;
}

}  // namespace privcot
