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
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "privcot/datasets.hpp"
#include "privcot/errors.hpp"
#include "privcot/generator.hpp"
#include "privcot/mechanism.hpp"
#include "privcot/metrics.hpp"
#include "privcot/pipeline.hpp"

namespace privcot {

struct SweepExampleRow {
    double epsilon = 0.0;
    std::size_t index = 0;
    double perturbed_ratio = 0.0;  // TokenRatio(r^p, r)
    double decoded_ratio = 0.0;    // TokenRatio(decoded, r)
};

struct SweepRow {
    double epsilon = 0.0;
    double mean_perturbed_ratio = 0.0;
    double mean_decoded_ratio = 0.0;
    std::size_t n = 0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::vector<SweepExampleRow> examples;
    std::vector<SkipRecord> skips;
};

// Measures the privacy-utility trade-off against a deterministic backend:
// for each budget, perturb every prompt, generate a rationale from the
// perturbed prompt and one from the raw prompt, and compare both the
// perturbed and the decoded rationale against the raw one. Per-(budget,
// prompt) rng streams keep the whole report reproducible from one seed.
inline SweepReport epsilon_sweep(const std::vector<std::vector<Token>>& prompts,
                                 const EmbeddingTable& table,
                                 const std::vector<double>& epsilons,
                                 GeneratorBackend& backend, const RationaleDecoder& decoder,
                                 std::uint64_t seed = 0,
                                 const InterruptFlag* interrupt = nullptr) {
    if (prompts.empty()) throw ValidationError("prompts must be non-empty");
    if (epsilons.empty()) throw ValidationError("need at least one epsilon");
    for (std::size_t i = 0; i + 1 < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i + 1]))
            throw ValidationError("epsilons must be strictly increasing");

    SweepReport report;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        double eps = epsilons[e];
        if (!(eps > 0.0)) throw ValidationError("epsilons must be > 0");
        double sum_perturbed = 0.0;
        double sum_decoded = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < prompts.size(); ++i) {
            check_interrupt(interrupt);
            if (prompts[i].empty()) {
                report.skips.push_back({i, "empty prompt"});
                continue;
            }
            try {
                PerturbationConfig cfg;
                cfg.epsilon = eps;
                // Stream depends on the prompt only: common random numbers
                // across budgets, so adjacent-epsilon comparisons see the
                // systematic shift rather than independent sampling noise.
                cfg.rng_seed = derive_seed(seed, i);
                PerturbedPrompt pp = perturb_prompt(table, prompts[i], cfg);
                std::vector<Token> r_p = backend.generate(pp.perturbed);
                std::vector<Token> r = backend.generate(prompts[i]);
                std::vector<Token> decoded = decoder(prompts[i], pp.perturbed, r_p);
                SweepExampleRow row;
                row.epsilon = eps;
                row.index = i;
                row.perturbed_ratio = token_ratio(r_p, r).value;
                row.decoded_ratio = token_ratio(decoded, r).value;
                sum_perturbed += row.perturbed_ratio;
                sum_decoded += row.decoded_ratio;
                ++n;
                report.examples.push_back(row);
            } catch (const Interrupted&) {
                throw;
            } catch (const std::exception& ex) {
                report.skips.push_back({i, ex.what()});
            }
        }
        SweepRow row;
        row.epsilon = eps;
        row.n = n;
        if (n) {
            row.mean_perturbed_ratio = sum_perturbed / static_cast<double>(n);
            row.mean_decoded_ratio = sum_decoded / static_cast<double>(n);
        }
        report.rows.push_back(row);
    }
    return report;
}

inline void write_sweep_csv(const SweepReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out.precision(17);
    out << "epsilon,mean_perturbed_ratio,mean_decoded_ratio,n\n";
    for (const auto& row : report.rows)
        out << row.epsilon << ',' << row.mean_perturbed_ratio << ',' << row.mean_decoded_ratio
            << ',' << row.n << '\n';
}

inline void write_sweep_detail_jsonl(const SweepReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    for (const auto& row : report.examples) {
        Json j{{"epsilon", row.epsilon},
               {"index", row.index},
               {"perturbed_ratio", row.perturbed_ratio},
               {"decoded_ratio", row.decoded_ratio}};
        out << j.dump() << '\n';
    }
}

// Spearman rank correlation; average ranks for ties. Used by the harnesses
// that assert the epsilon-vs-similarity trend.
inline double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw ValidationError("need two aligned series of length >= 2");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> rank(v.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
            i = j + 1;
        }
        return rank;
    };
    std::vector<double> ra = ranks(a);
    std::vector<double> rb = ranks(b);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(ra.size());
    mb /= static_cast<double>(rb.size());
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace privcot
