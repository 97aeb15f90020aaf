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
#include <string>
#include <vector>

#include "privcot/datasets.hpp"
#include "privcot/embedding.hpp"
#include "privcot/errors.hpp"
#include "privcot/token.hpp"

namespace privcot {

// Demonstrations plus query for in-context decoding. Demonstrations carry
// only public data: (perturbed prompt, perturbed rationale) pairs.
struct IclContext {
    std::vector<std::pair<std::vector<Token>, std::vector<Token>>> demonstrations;
    DecoderQuery query;
};

// Similarity between two perturbed prompts: mean over query tokens of the
// best scaled utility against any demo token. Self-similarity is maximal,
// so a query identical to a demonstration always ranks that demo first.
// Tokens missing from the table are skipped; no comparable pair means 0.
inline double prompt_similarity(const EmbeddingTable& table, const std::vector<Token>& query,
                                const std::vector<Token>& demo) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& q : query) {
        auto qi = table.index_of(q);
        if (!qi) continue;
        double best = -1.0;
        for (const auto& d : demo) {
            auto di = table.index_of(d);
            if (!di) continue;
            best = std::max(best, scaled_utility_by_index(table, *qi, *di));
        }
        if (best < 0.0) continue;
        sum += best;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

// Picks the k public examples most similar to the query's perturbed prompt
// (ties broken toward earlier dataset position) and renders them in dataset
// order ahead of the query.
inline IclContext assemble_icl_context(const std::vector<DecoderExample>& public_examples,
                                       const DecoderQuery& query, std::size_t k,
                                       const EmbeddingTable& table) {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (public_examples.size() < k)
        throw ValidationError("need at least k public examples, have " +
                              std::to_string(public_examples.size()));
    std::vector<std::size_t> order(public_examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> sim(public_examples.size());
    for (std::size_t i = 0; i < public_examples.size(); ++i)
        sim[i] = prompt_similarity(table, query.perturbed_prompt,
                                   public_examples[i].perturbed_prompt);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
    std::vector<std::size_t> selected(order.begin(), order.begin() + k);
    std::sort(selected.begin(), selected.end());

    IclContext ctx;
    ctx.query = query;
    for (std::size_t i : selected)
        ctx.demonstrations.emplace_back(public_examples[i].perturbed_prompt,
                                        public_examples[i].perturbed_rationale);
    return ctx;
}

// Deterministic text rendering: demonstrations first, then the query.
inline std::string render_icl(const IclContext& ctx) {
    std::string out;
    for (const auto& [pp, rr] : ctx.demonstrations) {
        out += "example prompt: " + join_tokens(pp) + "\n";
        out += "example rationale: " + join_tokens(rr) + "\n";
    }
    out += "prompt: " + join_tokens(ctx.query.prompt) + "\n";
    out += "perturbed prompt: " + join_tokens(ctx.query.perturbed_prompt) + "\n";
    out += "perturbed rationale: " + join_tokens(ctx.query.perturbed_rationale) + "\n";
    out += "rationale:";
    return out;
}

}  // namespace privcot
