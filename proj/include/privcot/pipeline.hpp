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

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "privcot/client.hpp"
#include "privcot/datasets.hpp"
#include "privcot/errors.hpp"
#include "privcot/generator.hpp"
#include "privcot/icl.hpp"
#include "privcot/mechanism.hpp"

namespace privcot {

// Cooperative cancellation flag checked between examples.
using InterruptFlag = std::atomic<bool>;

inline void check_interrupt(const InterruptFlag* flag) {
    if (flag && flag->load()) throw Interrupted();
}

namespace detail {

// Index-parallel map with deterministic placement: out[i] is always the
// result for input i no matter which worker got there first.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t parallelism, Fn&& fn) {
    if (parallelism <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(parallelism);
    std::size_t workers = std::min(parallelism, n);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// Per-prompt perturbation config: same settings, rng stream derived from
// (seed, prompt index) so output is schedule-independent.
inline PerturbationConfig config_for_prompt(const PerturbationConfig& base, std::size_t index) {
    PerturbationConfig cfg = base;
    cfg.rng_seed = derive_seed(base.rng_seed, index);
    return cfg;
}

// Builds the public encoder dataset: one (prompt, perturbed, epsilon) pair
// per input prompt. Empty prompts become skip records.
inline BuildResult<EncoderPair> build_encoder_dataset(
    const std::vector<std::vector<Token>>& public_prompts, const EmbeddingTable& table,
    const PerturbationConfig& config, const IdfScorer* scorer = nullptr,
    const InterruptFlag* interrupt = nullptr) {
    config.validate();
    BuildResult<EncoderPair> result;
    for (std::size_t i = 0; i < public_prompts.size(); ++i) {
        check_interrupt(interrupt);
        const auto& prompt = public_prompts[i];
        if (prompt.empty()) {
            result.skips.push_back({i, "empty prompt"});
            continue;
        }
        PerturbationConfig cfg = config_for_prompt(config, i);
        std::vector<double> importance;
        const std::vector<double>* imp = nullptr;
        if (cfg.allocation == BudgetAllocation::adaptive && cfg.adaptive_importance.empty() &&
            scorer) {
            importance = scorer->score(prompt);
            imp = &importance;
        }
        PerturbedPrompt pp = perturb_prompt(table, prompt, cfg, imp);
        result.items.push_back({prompt, std::move(pp.perturbed), config.epsilon});
    }
    return result;
}

// Raw-rationale source for public prompts. Public data may travel as-is,
// so this is a plain backend call, not a protocol exchange.
using RawRationaleFn = std::function<std::vector<Token>(const std::vector<Token>&)>;

inline RawRationaleFn raw_backend_fn(std::shared_ptr<GeneratorBackend> backend) {
    return [backend](const std::vector<Token>& prompt) { return backend->generate(prompt); };
}

// Builds the public decoder dataset: for each public prompt, the perturbed
// prompt, the server's rationale for it, and the raw rationale for the raw
// prompt. Per-example transport failures become skip records, not aborts.
inline BuildResult<DecoderExample> build_decoder_dataset(
    const std::vector<std::vector<Token>>& public_prompts, const EmbeddingTable& table,
    const PerturbationConfig& config, RationaleClient& client, const RawRationaleFn& raw_backend,
    const std::string& task_tag = "", const IdfScorer* scorer = nullptr,
    const InterruptFlag* interrupt = nullptr) {
    config.validate();
    BuildResult<DecoderExample> result;
    for (std::size_t i = 0; i < public_prompts.size(); ++i) {
        check_interrupt(interrupt);
        const auto& prompt = public_prompts[i];
        if (prompt.empty()) {
            result.skips.push_back({i, "empty prompt"});
            continue;
        }
        try {
            PerturbationConfig cfg = config_for_prompt(config, i);
            std::vector<double> importance;
            const std::vector<double>* imp = nullptr;
            if (cfg.allocation == BudgetAllocation::adaptive && cfg.adaptive_importance.empty() &&
                scorer) {
                importance = scorer->score(prompt);
                imp = &importance;
            }
            PerturbedPrompt pp = perturb_prompt(table, prompt, cfg, imp);
            RationaleResponse resp = client.request_rationale(pp, task_tag);
            std::vector<Token> raw = raw_backend(prompt);
            result.items.push_back(
                {prompt, std::move(pp.perturbed), std::move(resp.rationale), std::move(raw)});
        } catch (const Interrupted&) {
            throw;
        } catch (const std::exception& e) {
            result.skips.push_back({i, e.what()});
        }
    }
    return result;
}

// A rationale decoder: client-local knowledge in, aligned rationale out.
using RationaleDecoder = std::function<std::vector<Token>(
    const std::vector<Token>& prompt, const std::vector<Token>& perturbed_prompt,
    const std::vector<Token>& perturbed_rationale)>;

// Passes the perturbed rationale through untouched.
inline RationaleDecoder identity_decoder() {
    return [](const std::vector<Token>&, const std::vector<Token>&,
              const std::vector<Token>& perturbed_rationale) { return perturbed_rationale; };
}

// Rule-based token repair: snap each in-vocabulary rationale word to the
// nearest word of the raw prompt when the similarity clears `threshold`;
// leave everything else (including out-of-vocabulary scaffold words) alone.
// Runs client-side, so looking at the raw prompt leaks nothing.
inline RationaleDecoder repair_decoder(const EmbeddingTable& table, double threshold = 0.85) {
    return [&table, threshold](const std::vector<Token>& prompt, const std::vector<Token>&,
                               const std::vector<Token>& perturbed_rationale) {
        std::vector<std::size_t> prompt_idx;
        for (const auto& p : prompt) {
            auto pi = table.index_of(p);
            if (pi) prompt_idx.push_back(*pi);
        }
        std::vector<Token> out;
        out.reserve(perturbed_rationale.size());
        for (const auto& y : perturbed_rationale) {
            auto yi = table.index_of(y);
            if (!yi || prompt_idx.empty()) {
                out.push_back(y);
                continue;
            }
            double best = -1.0;
            std::size_t best_idx = 0;
            for (std::size_t pi : prompt_idx) {
                double u = scaled_utility_by_index(table, *yi, pi);
                if (u > best) {
                    best = u;
                    best_idx = pi;
                }
            }
            out.push_back(best >= threshold ? table.token_at(best_idx) : y);
        }
        return out;
    };
}

// In-context decoder: build a context from the public pool, hand it to a
// text-completion backend, tokenize whatever comes back.
inline RationaleDecoder icl_decoder(std::shared_ptr<std::vector<DecoderExample>> public_pool,
                                    std::size_t k, const EmbeddingTable& table,
                                    std::shared_ptr<GeneratorBackend> completion) {
    return [public_pool, k, &table, completion](const std::vector<Token>& prompt,
                                                const std::vector<Token>& perturbed_prompt,
                                                const std::vector<Token>& perturbed_rationale) {
        DecoderQuery query{prompt, perturbed_prompt, perturbed_rationale};
        IclContext ctx = assemble_icl_context(*public_pool, query, k, table);
        return completion->generate(tokenize(render_icl(ctx)));
    };
}

// End-to-end private run: perturb each private prompt, fetch the perturbed
// rationale through the client, decode it locally, and emit a task-specific
// training example. Raw private tokens never reach the request path; when a
// step fails the example degrades to label-only instead of aborting the run.
inline BuildResult<DistillExample> run_pipeline(
    const std::vector<std::vector<Token>>& private_prompts,
    const std::vector<std::vector<Token>>& labels, const EmbeddingTable& table,
    const PerturbationConfig& config, RationaleClient& client, const RationaleDecoder& decoder,
    const std::string& task_tag = "", std::size_t parallelism = 1,
    const IdfScorer* scorer = nullptr, const InterruptFlag* interrupt = nullptr) {
    config.validate();
    if (private_prompts.size() != labels.size())
        throw ValidationError("prompts and labels must have equal length");

    struct Slot {
        bool skipped = false;
        SkipRecord skip;
        DistillExample example;
    };
    std::vector<Slot> slots(private_prompts.size());

    detail::parallel_for(private_prompts.size(), parallelism, [&](std::size_t i) {
        check_interrupt(interrupt);
        Slot& slot = slots[i];
        const auto& prompt = private_prompts[i];
        if (prompt.empty()) {
            slot.skipped = true;
            slot.skip = {i, "empty prompt"};
            return;
        }
        if (labels[i].empty()) {
            slot.skipped = true;
            slot.skip = {i, "empty label"};
            return;
        }
        slot.example.input = prompt;
        slot.example.label = labels[i];
        try {
            PerturbationConfig cfg = config_for_prompt(config, i);
            std::vector<double> importance;
            const std::vector<double>* imp = nullptr;
            if (cfg.allocation == BudgetAllocation::adaptive && cfg.adaptive_importance.empty() &&
                scorer) {
                importance = scorer->score(prompt);
                imp = &importance;
            }
            PerturbedPrompt pp = perturb_prompt(table, prompt, cfg, imp);
            RationaleResponse resp = client.request_rationale(pp, task_tag);
            slot.example.rationale = decoder(prompt, pp.perturbed, resp.rationale);
            slot.example.label_only = slot.example.rationale.empty();
        } catch (const Interrupted&) {
            throw;
        } catch (const std::exception&) {
            slot.example.rationale.clear();
            slot.example.label_only = true;
        }
    });

    BuildResult<DistillExample> result;
    for (auto& slot : slots) {
        if (slot.skipped)
            result.skips.push_back(slot.skip);
        else
            result.items.push_back(std::move(slot.example));
    }
    return result;
}

}  // namespace privcot
