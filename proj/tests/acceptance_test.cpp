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

// Acceptance suite: one criterion per function, one PASS/FAIL line each,
// every tolerance pinned in code. Exit status is the number of failures.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "privcot/privcot.hpp"

namespace fs = std::filesystem;
using namespace privcot;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// 1. Exact DP bound on the 5-token fixture for eps in {0.5, 1, 3, 10};
//    analytic max ratio <= e^eps + 1e-9. Budget: 1 s.
Outcome criterion_dp_bound() {
    auto start = Clock::now();
    EmbeddingTable table = make_separated_table(5, 4, 7);
    std::string detail;
    for (double eps : {0.5, 1.0, 3.0, 10.0}) {
        DpBoundReport r = verify_dp_bound(table, eps, table.tokens());
        detail += "eps=" + fmt(eps) + " max_ratio=" + fmt(r.max_ratio) +
                  " bound=" + fmt(r.bound) + "; ";
        if (!r.pass || !(r.max_ratio <= std::exp(eps) + 1e-9)) return {false, detail};
    }
    double dt = seconds_since(start);
    detail += "in " + fmt(dt) + "s";
    return {dt < 1.0, detail};
}

// 2. Sampler fidelity: 100k draws at eps=2 over 3 candidates match the
//    analytic distribution with total-variation distance < 0.01. Budget: 5 s.
Outcome criterion_sampler_fidelity() {
    auto start = Clock::now();
    EmbeddingTable table = make_triangle_table();
    auto expected = em_distribution(table, Token("a"), 2.0, table.tokens());
    Rng rng(2024);
    const int n = 100000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i)
        counts[table.require_index(sample_replacement(table, Token("a"), 2.0, table.tokens(),
                                                      rng))]++;
    double tv = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        tv += std::abs(static_cast<double>(counts[j]) / n - expected[j]);
    tv /= 2.0;
    double dt = seconds_since(start);
    return {tv < 0.01 && dt < 5.0, "tv=" + fmt(tv) + " in " + fmt(dt) + "s"};
}

// 3. Privacy-utility trend: sweep over {0.5, 1, 2, 4, 8} with the mock
//    generator on 50 synthetic prompts. Mean TokenRatio non-decreasing with
//    Spearman rho > 0.9, and decoded >= perturbed at every eps with the
//    rule-based repair decoder. Budget: 30 s.
Outcome criterion_privacy_utility_trend() {
    auto start = Clock::now();
    EmbeddingTable table = make_clustered_table(5, 20, 16, 0.1, 7);
    auto prompts = make_cluster_prompts(5, 20, 50, 14, 3);
    auto backend = make_mock_generator(42);
    std::vector<double> epsilons{0.5, 1.0, 2.0, 4.0, 8.0};
    SweepReport report =
        epsilon_sweep(prompts, table, epsilons, *backend, repair_decoder(table, 0.8), 4);
    std::string detail;
    std::vector<double> means;
    bool non_decreasing = true;
    bool decoded_dominates = true;
    double prev = -1.0;
    for (const auto& row : report.rows) {
        means.push_back(row.mean_perturbed_ratio);
        detail += fmt(row.mean_perturbed_ratio) + "/" + fmt(row.mean_decoded_ratio) + " ";
        if (row.mean_perturbed_ratio < prev) non_decreasing = false;
        if (row.mean_decoded_ratio < row.mean_perturbed_ratio) decoded_dominates = false;
        prev = row.mean_perturbed_ratio;
    }
    double rho = spearman_rho(epsilons, means);
    double dt = seconds_since(start);
    detail += "rho=" + fmt(rho) + " in " + fmt(dt) + "s";
    return {non_decreasing && rho > 0.9 && decoded_dominates && dt < 30.0, detail};
}

// Straight-line mean CE, independent of the library forward path.
double straightline_ce(const ToyModel& m, const std::vector<Token>& input,
                       const std::vector<Token>& target) {
    const std::size_t v = m.vocab_size();
    const std::size_t d = m.dim();
    double total = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        std::vector<double> h(d, 0.0);
        for (const auto& tok : input) {
            std::size_t i = m.require_index(tok);
            for (std::size_t k = 0; k < d; ++k) h[k] += m.emb[i * d + k];
        }
        for (std::size_t k = 0; k < d; ++k) h[k] /= static_cast<double>(input.size());
        if (t > 0) {
            std::vector<double> p(d, 0.0);
            for (std::size_t j = 0; j < t; ++j) {
                std::size_t i = m.require_index(target[j]);
                for (std::size_t k = 0; k < d; ++k) p[k] += m.emb[i * d + k];
            }
            for (std::size_t k = 0; k < d; ++k) h[k] += p[k] / static_cast<double>(t);
        }
        std::vector<double> z(v, 0.0);
        for (std::size_t j = 0; j < v; ++j) {
            z[j] = m.bias[j];
            for (std::size_t k = 0; k < d; ++k) z[j] += m.out_w[k * v + j] * h[k];
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < v; ++j) denom += std::exp(z[j]);
        total += -std::log(std::exp(z[m.require_index(target[t])]) / denom);
    }
    return total / static_cast<double>(target.size());
}

// 4. Loss algebra and gradients: L1 and L2 on a pinned model match the
//    straight-line recomputation to 1e-9; analytic gradients match central
//    finite differences (h=1e-5) with max relative error < 1e-4. Budget: 10 s.
Outcome criterion_loss_and_gradients() {
    auto start = Clock::now();
    std::vector<Token> vocab;
    for (const char* w : {"a", "b", "c", "d", "e"}) vocab.emplace_back(w);
    ToyModel model = ToyModel::random_init(vocab, 3, 1234, 0.4);

    EncoderPair enc{{Token("a"), Token("c")}, {Token("b"), Token("d")}, 1.0};
    DecoderExample dec{{Token("a")}, {Token("b")}, {Token("c"), Token("d")},
                       {Token("d"), Token("e")}};
    DistillExample dis{{Token("a"), Token("c")}, {Token("b")}, {Token("d"), Token("a")}, false};
    DistillExample dis2{{Token("e")}, {Token("c")}, {}, true};
    std::vector<DistillExample> batch{dis, dis2};
    LossWeights w{0.5, 0.5};

    double l1 = loss_l1(model, {enc}, {dec});
    std::vector<Token> dec_input = concat_tokens({&dec.prompt, &dec.perturbed_prompt,
                                                  &dec.perturbed_rationale});
    double l1_oracle = straightline_ce(model, enc.prompt, enc.perturbed) +
                       straightline_ce(model, dec_input, dec.rationale);
    double l2 = loss_l2(model, batch, w);
    // label term: alpha * mean over both examples; rationale term: beta *
    // mean over the single example that has one.
    double l2_oracle = 0.5 * ((straightline_ce(model, dis.input, dis.label) +
                               straightline_ce(model, dis2.input, dis2.label)) /
                              2.0) +
                       0.5 * straightline_ce(model, dis.input, dis.rationale);

    bool scalars_ok = std::abs(l1 - l1_oracle) < 1e-9 && std::abs(l2 - l2_oracle) < 1e-9;

    // Finite differences over every parameter for both losses.
    auto fd_check = [&](const std::function<double(const ToyModel&)>& f,
                        const Gradients& analytic) {
        const double h = 1e-5;
        double worst = 0.0;
        ToyModel probe = model;
        auto scan = [&](std::vector<double>& params, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                double orig = params[i];
                params[i] = orig + h;
                double up = f(probe);
                params[i] = orig - h;
                double down = f(probe);
                params[i] = orig;
                double numeric = (up - down) / (2.0 * h);
                double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
                worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
            }
        };
        scan(probe.emb, analytic.emb);
        scan(probe.out_w, analytic.out_w);
        scan(probe.bias, analytic.bias);
        return worst;
    };
    double worst_l1 = fd_check(
        [&](const ToyModel& m) { return loss_l1(m, {enc}, {dec}); }, grad_l1(model, {enc}, {dec}));
    double worst_l2 = fd_check(
        [&](const ToyModel& m) { return loss_l2(m, batch, w); }, grad_l2(model, batch, w));

    double dt = seconds_since(start);
    std::string detail = "dL1=" + fmt(std::abs(l1 - l1_oracle)) +
                         " dL2=" + fmt(std::abs(l2 - l2_oracle)) +
                         " fd_l1=" + fmt(worst_l1) + " fd_l2=" + fmt(worst_l2) + " in " +
                         fmt(dt) + "s";
    return {scalars_ok && worst_l1 < 1e-4 && worst_l2 < 1e-4 && dt < 10.0, detail};
}

// 5. Toy multi-task distillation: the fixed-seed recipe halves L2 within
//    500 steps and two same-seed runs give identical traces. Budget: 60 s.
Outcome criterion_toy_distillation() {
    auto start = Clock::now();
    ToyTask task = make_toy_task(7);
    TrainConfig cfg{0.5, 500, 0, 7};
    LossWeights w{0.5, 0.5};
    TrainResult a = train_l2(ToyModel::random_init(task.vocab, 8, 7), task.data, w, cfg);
    TrainResult b = train_l2(ToyModel::random_init(task.vocab, 8, 7), task.data, w, cfg);
    bool identical = a.trace.size() == b.trace.size();
    if (identical)
        for (std::size_t i = 0; i < a.trace.size(); ++i)
            identical = identical && a.trace[i].total == b.trace[i].total &&
                        a.trace[i].part_a == b.trace[i].part_a &&
                        a.trace[i].part_b == b.trace[i].part_b;
    double initial = a.trace.front().total;
    double final_loss = a.trace.back().total;
    double dt = seconds_since(start);
    std::string detail = "L2 " + fmt(initial) + " -> " + fmt(final_loss) +
                         (identical ? ", traces identical" : ", traces DIFFER") + " in " +
                         fmt(dt) + "s";
    return {final_loss < 0.5 * initial && identical && dt < 60.0, detail};
}

// 6. Privacy boundary: sentinel tokens planted in private prompts never
//    appear in any captured wire frame. Zero occurrences required.
Outcome criterion_privacy_boundary() {
    EmbeddingTable table = make_clustered_table(5, 10, 16, 0.1, 7);
    auto prompts = make_cluster_prompts(5, 10, 20, 6, 3);
    const std::string sentinel = "zzqsecretzzq";
    for (std::size_t i = 0; i < prompts.size(); ++i)
        prompts[i].insert(prompts[i].begin() + static_cast<long>(i % prompts[i].size()),
                          Token(sentinel + std::to_string(i)));
    std::vector<std::vector<Token>> labels(prompts.size(), {Token("yes")});
    auto loopback = std::make_shared<LoopbackTransport>(make_mock_generator(42));
    RationaleClient client(loopback);
    PerturbationConfig cfg;
    cfg.epsilon = 1.0;
    cfg.rng_seed = 11;
    auto result = run_pipeline(prompts, labels, table, cfg, client, repair_decoder(table, 0.8),
                               "qa");
    std::size_t occurrences = 0;
    std::size_t frames = 0;
    for (const auto& frame : loopback->captured_frames()) {
        ++frames;
        if (frame.find(sentinel) != std::string::npos) ++occurrences;
    }
    std::string detail = fmt(static_cast<double>(occurrences)) + " occurrences in " +
                         fmt(static_cast<double>(frames)) + " frames, " +
                         fmt(static_cast<double>(result.items.size())) + " examples";
    return {occurrences == 0 && result.items.size() == prompts.size() && frames > 0, detail};
}

// 7. Identity limit: at eps=500 on the separated fixture, >= 99% of
//    perturbed tokens equal their originals across 1000 tokens.
Outcome criterion_identity_limit() {
    EmbeddingTable table = make_separated_table(5, 4, 7);
    PerturbationConfig cfg;
    cfg.epsilon = 500.0;
    std::size_t total = 0, same = 0;
    for (std::size_t run = 0; run < 10; ++run) {
        std::vector<Token> prompt;
        Rng rng(run);
        for (std::size_t i = 0; i < 100; ++i)
            prompt.push_back(table.token_at(rng.next_index(table.size())));
        cfg.rng_seed = run;
        PerturbedPrompt pp = perturb_prompt(table, prompt, cfg);
        for (std::size_t i = 0; i < prompt.size(); ++i) {
            ++total;
            if (pp.original[i] == pp.perturbed[i]) ++same;
        }
    }
    double frac = static_cast<double>(same) / static_cast<double>(total);
    return {total == 1000 && frac >= 0.99,
            fmt(static_cast<double>(same)) + "/" + fmt(static_cast<double>(total)) + " identical"};
}

std::string g_self_dir;  // directory of this binary, for locating the CLI

std::string find_cli() {
    if (const char* env = std::getenv("PRIVCOT_CLI")) return env;
    fs::path sibling = fs::path(g_self_dir) / ".." / "tools" / "privcot";
    std::error_code ec;
    if (fs::exists(sibling, ec)) return sibling.string();
    return {};
}

// 8. End-to-end reproducibility: a second cmd_run driven by the first run's
//    manifest reproduces the dataset artifacts byte-for-byte.
Outcome criterion_reproducible_run() {
    std::string cli_path = find_cli();
    if (cli_path.empty()) return {false, "CLI binary not found (set PRIVCOT_CLI)"};
    const char* cli = cli_path.c_str();
    fs::path dir = fs::temp_directory_path() / ("privcot_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto sh = [&](const std::string& cmd) {
        int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
        return rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    std::string emb = (dir / "emb.txt").string();
    std::string prompts = (dir / "prompts.txt").string();
    std::string labels = (dir / "labels.txt").string();
    if (!sh(std::string(cli) + " gen-embeddings --out " + emb +
            " --style clustered --tokens 30 --dim 8 --clusters 3 --seed 7"))
        return {false, "gen-embeddings failed"};
    {
        std::ofstream p(prompts), l(labels);
        for (int i = 0; i < 8; ++i) {
            int c = i % 3;
            p << "tok" << c * 10 << " tok" << c * 10 + 1 << " tok" << c * 10 + 2 << "\n";
            l << (i % 2 ? "yes" : "no") << "\n";
        }
    }
    std::string base = std::string(cli) + " run --embeddings " + emb + " --prompts " + prompts +
                       " --labels " + labels + " --backend mock";
    if (!sh(base + " --epsilon 2 --seed 3 --out " + (dir / "r1").string()))
        return {false, "first run failed"};
    if (!sh(base + " --manifest " + (dir / "r1" / "manifest.json").string() + " --out " +
            (dir / "r2").string()))
        return {false, "manifest replay failed"};
    bool same_data = slurp(dir / "r1" / "distill.jsonl") == slurp(dir / "r2" / "distill.jsonl");
    bool same_manifest = slurp(dir / "r1" / "manifest.json") == slurp(dir / "r2" / "manifest.json");
    bool nonempty = !slurp(dir / "r1" / "distill.jsonl").empty();
    fs::remove_all(dir);
    return {same_data && same_manifest && nonempty,
            std::string("dataset ") + (same_data ? "identical" : "DIFFERS") + ", manifest " +
                (same_manifest ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int, char** argv) {
    g_self_dir = fs::path(argv[0]).parent_path().string();
    struct Criterion {
        const char* name;
        std::function<Outcome()> fn;
    };
    std::vector<Criterion> criteria{
        {"1 dp-bound-exact", criterion_dp_bound},
        {"2 sampler-fidelity", criterion_sampler_fidelity},
        {"3 privacy-utility-trend", criterion_privacy_utility_trend},
        {"4 loss-algebra-gradients", criterion_loss_and_gradients},
        {"5 toy-distillation", criterion_toy_distillation},
        {"6 privacy-boundary", criterion_privacy_boundary},
        {"7 identity-limit", criterion_identity_limit},
        {"8 reproducible-run", criterion_reproducible_run},
    };
    int failures = 0;
    for (auto& c : criteria) {
        Outcome outcome;
        try {
            outcome = c.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %s: %s\n", outcome.pass ? "PASS" : "FAIL", c.name,
                    outcome.detail.c_str());
        if (!outcome.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
