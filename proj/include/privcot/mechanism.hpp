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
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "privcot/embedding.hpp"
#include "privcot/errors.hpp"
#include "privcot/rng.hpp"
#include "privcot/token.hpp"

namespace privcot {

enum class CandidatePolicy {
    // The whole vocabulary is eligible as a replacement. This is the only
    // policy whose output distribution is data-independent, hence the only
    // one the epsilon-DP guarantee covers.
    full_vocabulary,
    // A caller-supplied fixed list. Private as long as the list itself was
    // chosen independently of the data.
    fixed_list,
    // k nearest tokens to the input token. Data-dependent, therefore NOT
    // differentially private; exists only as an explicitly-flagged speed
    // mode for exploratory runs.
    top_k_nonprivate,
};

enum class BudgetAllocation { uniform, adaptive };

struct PerturbationConfig {
    double epsilon = 1.0;  // per-token budget; the mean budget under adaptive allocation
    CandidatePolicy candidate_policy = CandidatePolicy::full_vocabulary;
    std::vector<Token> fixed_candidates;  // used with CandidatePolicy::fixed_list
    std::size_t top_k = 0;                // used with CandidatePolicy::top_k_nonprivate
    BudgetAllocation allocation = BudgetAllocation::uniform;
    std::vector<double> adaptive_importance;  // optional per-position importance
    double epsilon_cap = 0.0;                 // 0 means "use 2 * epsilon"
    std::uint64_t rng_seed = 0;

    double effective_cap() const { return epsilon_cap > 0.0 ? epsilon_cap : 2.0 * epsilon; }

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon))
            throw ValidationError("epsilon must be a positive finite number");
        if (candidate_policy == CandidatePolicy::fixed_list && fixed_candidates.empty())
            throw ValidationError("fixed-list candidate policy requires a non-empty list");
        if (candidate_policy == CandidatePolicy::top_k_nonprivate && top_k == 0)
            throw ValidationError("top-k policy requires top_k >= 1");
        for (double w : adaptive_importance)
            if (w < 0.0 || !std::isfinite(w))
                throw ValidationError("importance weights must be nonnegative and finite");
        if (effective_cap() < epsilon)
            throw ValidationError("epsilon_cap must be >= epsilon");
    }
};

struct PerturbedPrompt {
    std::vector<Token> original;
    std::vector<Token> perturbed;
    std::vector<double> budgets;             // epsilon actually applied per position
    std::vector<std::size_t> oov_positions;  // positions replaced by a uniform draw

    double epsilon_max() const {
        double m = 0.0;
        for (double b : budgets) m = std::max(m, b);
        return m;
    }
};

// Exponential-mechanism output distribution for one input token: selects
// candidate y with probability proportional to exp(eps * u'(x, y) / 2),
// where u' is the [0,1]-scaled cosine utility (sensitivity exactly 1).
// Computed in log space with max-subtraction so large eps cannot overflow.
inline std::vector<double> em_distribution(const EmbeddingTable& table, const Token& x,
                                           double epsilon, const std::vector<Token>& candidates) {
    if (candidates.empty()) throw ValidationError("candidate set must be non-empty");
    if (epsilon < 0.0 || !std::isfinite(epsilon))
        throw ValidationError("epsilon must be finite and >= 0");
    std::size_t xi = table.require_index(x);
    std::vector<double> logw(candidates.size());
    double max_logw = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        std::size_t yi = table.require_index(candidates[c]);
        logw[c] = epsilon * scaled_utility_by_index(table, xi, yi) / 2.0;
        max_logw = std::max(max_logw, logw[c]);
    }
    double sum = 0.0;
    for (double& w : logw) {
        w = std::exp(w - max_logw);
        sum += w;
    }
    for (double& w : logw) w /= sum;
    return logw;
}

// One inverse-CDF draw from em_distribution. Deterministic given the rng state.
inline Token sample_replacement(const EmbeddingTable& table, const Token& x, double epsilon,
                                const std::vector<Token>& candidates, Rng& rng) {
    std::vector<double> p = em_distribution(table, x, epsilon, candidates);
    double u = rng.next_double();
    double cum = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        cum += p[c];
        if (u < cum) return candidates[c];
    }
    return candidates.back();
}

// Splits a total budget across S positions. Convention: higher importance
// means more privacy-sensitive, hence a smaller budget (stronger noise).
// Weights are the inverses of the importances, normalized so the mean of
// the result equals total_epsilon; each entry is clamped to
// [0, epsilon_cap] with the clamped excess redistributed among the rest.
inline std::vector<double> allocate_budgets(double total_epsilon,
                                            const std::vector<double>& importance,
                                            double epsilon_cap) {
    if (importance.empty()) throw ValidationError("importance list must be non-empty");
    if (!(total_epsilon > 0.0)) throw ValidationError("total_epsilon must be > 0");
    if (epsilon_cap < total_epsilon)
        throw ValidationError("epsilon_cap must be >= total_epsilon");
    double max_imp = 0.0;
    for (double w : importance) {
        if (w < 0.0 || !std::isfinite(w)) throw ValidationError("importance must be nonnegative and finite");
        max_imp = std::max(max_imp, w);
    }
    const std::size_t s = importance.size();
    std::vector<double> result(s, 0.0);
    if (max_imp == 0.0) {
        // No signal: uniform split.
        std::fill(result.begin(), result.end(), total_epsilon);
        return result;
    }
    // Zero importance would make the inverse weight infinite; floor it so
    // those positions take the largest finite share and everyone keeps a
    // strictly positive budget.
    const double floor = 1e-6 * max_imp;
    std::vector<double> weight(s);
    for (std::size_t i = 0; i < s; ++i) weight[i] = 1.0 / std::max(importance[i], floor);

    std::vector<bool> capped(s, false);
    double remaining = total_epsilon * static_cast<double>(s);
    // Water-filling: proportional split, cap the overflowing entries, repeat
    // on whatever budget is left. Terminates in <= s rounds.
    for (;;) {
        double wsum = 0.0;
        for (std::size_t i = 0; i < s; ++i)
            if (!capped[i]) wsum += weight[i];
        if (wsum == 0.0) break;
        bool newly_capped = false;
        for (std::size_t i = 0; i < s; ++i) {
            if (capped[i]) continue;
            double share = remaining * weight[i] / wsum;
            if (share > epsilon_cap) {
                result[i] = epsilon_cap;
                capped[i] = true;
                newly_capped = true;
            }
        }
        if (!newly_capped) {
            for (std::size_t i = 0; i < s; ++i)
                if (!capped[i]) result[i] = remaining * weight[i] / wsum;
            break;
        }
        remaining = total_epsilon * static_cast<double>(s);
        for (std::size_t i = 0; i < s; ++i)
            if (capped[i]) remaining -= epsilon_cap;
    }
    return result;
}

// Inverse-document-frequency importance over a public corpus: rarer words
// identify their author more, so they score higher (and get less budget).
class IdfScorer {
public:
    explicit IdfScorer(const std::vector<std::vector<Token>>& public_corpus) {
        n_docs_ = public_corpus.size();
        for (const auto& doc : public_corpus) {
            std::unordered_map<std::string, bool> seen;
            for (const auto& t : doc) {
                if (!seen.emplace(t.text, true).second) continue;
                ++df_[t.text];
            }
        }
    }

    double idf(const Token& t) const {
        auto it = df_.find(t.text);
        std::size_t df = it == df_.end() ? 0 : it->second;
        return std::log(static_cast<double>(1 + n_docs_) / static_cast<double>(1 + df));
    }

    std::vector<double> score(const std::vector<Token>& prompt) const {
        std::vector<double> out;
        out.reserve(prompt.size());
        for (const auto& t : prompt) out.push_back(idf(t));
        return out;
    }

private:
    std::unordered_map<std::string, std::size_t> df_;
    std::size_t n_docs_ = 0;
};

namespace detail {

inline std::vector<Token> candidate_set_for(const EmbeddingTable& table,
                                            const PerturbationConfig& config,
                                            const Token* input /* nullable */) {
    switch (config.candidate_policy) {
        case CandidatePolicy::fixed_list:
            return config.fixed_candidates;
        case CandidatePolicy::top_k_nonprivate: {
            if (!input) return table.tokens();
            std::size_t xi = table.require_index(*input);
            std::vector<std::size_t> idx(table.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::size_t k = std::min(config.top_k, table.size());
            std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                              [&](std::size_t a, std::size_t b) {
                                  return table.cosine(xi, a) > table.cosine(xi, b);
                              });
            std::vector<Token> out;
            out.reserve(k);
            for (std::size_t i = 0; i < k; ++i) out.push_back(table.token_at(idx[i]));
            return out;
        }
        case CandidatePolicy::full_vocabulary:
        default:
            return table.tokens();
    }
}

}  // namespace detail

// Token-wise perturbation of a whole prompt. Each in-vocabulary token is
// replaced by an exponential-mechanism draw with its allocated budget.
// Out-of-vocabulary tokens are never echoed: they are replaced by a uniform
// draw from the candidate set (input-independent, so zero budget spent) and
// recorded in oov_positions. Position i draws from rng stream
// (config.rng_seed, i), so any parallel schedule reproduces the same output.
inline PerturbedPrompt perturb_prompt(const EmbeddingTable& table, const std::vector<Token>& prompt,
                                      const PerturbationConfig& config,
                                      const std::vector<double>* importance = nullptr) {
    config.validate();
    if (prompt.empty()) throw ValidationError("prompt must be non-empty");

    std::vector<double> budgets;
    if (config.allocation == BudgetAllocation::uniform) {
        budgets.assign(prompt.size(), config.epsilon);
    } else {
        const std::vector<double>* imp = importance ? importance : &config.adaptive_importance;
        if (imp->size() != prompt.size())
            throw ValidationError("importance length must match prompt length");
        budgets = allocate_budgets(config.epsilon, *imp, config.effective_cap());
    }

    PerturbedPrompt result;
    result.original = prompt;
    result.perturbed.reserve(prompt.size());
    result.budgets.resize(prompt.size());

    for (std::size_t i = 0; i < prompt.size(); ++i) {
        Rng rng = Rng::stream(config.rng_seed, i);
        if (!table.contains(prompt[i])) {
            std::vector<Token> cands = detail::candidate_set_for(table, config, nullptr);
            result.perturbed.push_back(cands[rng.next_index(cands.size())]);
            result.budgets[i] = 0.0;
            result.oov_positions.push_back(i);
            continue;
        }
        std::vector<Token> cands = detail::candidate_set_for(table, config, &prompt[i]);
        result.perturbed.push_back(sample_replacement(table, prompt[i], budgets[i], cands, rng));
        result.budgets[i] = budgets[i];
    }
    return result;
}

using DistributionFn = std::function<std::vector<double>(
    const EmbeddingTable&, const Token&, double, const std::vector<Token>&)>;

struct DpPairRatio {
    std::string x;
    std::string x_prime;
    std::string worst_output;
    double max_ratio = 0.0;
};

struct DpBoundReport {
    double epsilon = 0.0;
    double bound = 1.0;  // e^epsilon
    double max_ratio = 0.0;
    DpPairRatio worst;
    std::vector<DpPairRatio> pairs;  // one row per ordered input pair
    bool pass = false;
};

// Exact verification of the epsilon-DP bound at token granularity: for every
// ordered pair of input tokens (x, x') and every output y in the candidate
// set, Pr[M(x)=y] / Pr[M(x')=y] must stay within e^epsilon. Enumerates the
// full analytic distributions; nothing is sampled. `dist` is replaceable so
// tests can inject a corrupted mechanism and watch the check fail.
inline DpBoundReport verify_dp_bound(const EmbeddingTable& table, double epsilon,
                                     const std::vector<Token>& candidates,
                                     const DistributionFn& dist = {}) {
    if (candidates.size() > 1000)
        throw ValidationError("exact enumeration limited to <= 1000 candidates");
    const DistributionFn& d = dist ? dist : DistributionFn(
        [](const EmbeddingTable& t, const Token& x, double eps, const std::vector<Token>& c) {
            return em_distribution(t, x, eps, c);
        });

    const auto& inputs = table.tokens();
    std::vector<std::vector<double>> dists;
    dists.reserve(inputs.size());
    for (const auto& x : inputs) dists.push_back(d(table, x, epsilon, candidates));

    DpBoundReport report;
    report.epsilon = epsilon;
    report.bound = std::exp(epsilon);
    for (std::size_t a = 0; a < inputs.size(); ++a) {
        for (std::size_t b = 0; b < inputs.size(); ++b) {
            if (a == b) continue;
            DpPairRatio row;
            row.x = inputs[a].text;
            row.x_prime = inputs[b].text;
            for (std::size_t y = 0; y < candidates.size(); ++y) {
                double ratio = dists[a][y] / dists[b][y];
                if (ratio > row.max_ratio) {
                    row.max_ratio = ratio;
                    row.worst_output = candidates[y].text;
                }
            }
            if (row.max_ratio > report.max_ratio) {
                report.max_ratio = row.max_ratio;
                report.worst = row;
            }
            report.pairs.push_back(std::move(row));
        }
    }
    if (inputs.size() < 2) report.max_ratio = 1.0;
    report.pass = report.max_ratio <= report.bound + 1e-9;
    return report;
}

}  // namespace privcot
