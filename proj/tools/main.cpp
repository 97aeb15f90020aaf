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

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "privcot/http_generator.hpp"
#include "privcot/privcot.hpp"

namespace fs = std::filesystem;
using namespace privcot;

namespace {

InterruptFlag g_interrupt{false};

void on_sigint(int) { g_interrupt.store(true); }

std::vector<std::vector<Token>> read_prompt_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open: " + path);
    std::vector<std::vector<Token>> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(tokenize(line));
    return out;
}

struct BackendFlags {
    std::string backend = "mock";  // mock | loopback | http
    std::string endpoint;
    std::string api_key_env = "PRIVCOT_API_KEY";
    std::uint64_t seed = 0;

    std::shared_ptr<GeneratorBackend> make() const {
        if (backend == "mock" || backend == "loopback") return make_mock_generator(seed);
        if (backend == "http") {
            if (endpoint.empty()) throw ValidationError("--backend http requires --endpoint");
            return make_http_generator(endpoint, api_key_env);
        }
        throw ValidationError("unknown backend: " + backend);
    }
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
    cmd->add_option("--backend", flags.backend, "Rationale backend: mock | loopback | http")
        ->check(CLI::IsMember({"mock", "loopback", "http"}))
        ->capture_default_str();
    cmd->add_option("--endpoint", flags.endpoint, "HTTP endpoint URL for --backend http");
    cmd->add_option("--api-key-env", flags.api_key_env,
                    "Environment variable holding the API key (never passed as a flag)")
        ->capture_default_str();
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ValidationError("cannot create output dir: " + out + ": " + ec.message());
    if (!fs::is_directory(out)) throw ValidationError("not a directory: " + out);
}

Json perturbed_to_json(const PerturbedPrompt& p) {
    return Json{{"original", tokens_to_json(p.original)},
                {"perturbed", tokens_to_json(p.perturbed)},
                {"budgets", p.budgets},
                {"oov", p.oov_positions}};
}

// ---------------------------------------------------------------- perturb

struct PerturbArgs {
    std::string embeddings, prompts, out;
    double epsilon = 1.0;
    double epsilon_cap = 0.0;
    std::uint64_t seed = 0;
    bool adaptive = false;
};

int cmd_perturb(const PerturbArgs& a) {
    EmbeddingTable table = load_embeddings(a.embeddings);
    auto prompts = read_prompt_lines(a.prompts);
    ensure_out_dir(a.out);

    PerturbationConfig config;
    config.epsilon = a.epsilon;
    config.epsilon_cap = a.epsilon_cap;
    config.rng_seed = a.seed;
    IdfScorer scorer(prompts);
    if (a.adaptive) config.allocation = BudgetAllocation::adaptive;
    config.validate();

    std::ofstream jl(a.out + "/perturbed.jsonl", std::ios::binary);
    if (!jl) throw ValidationError("cannot open for writing: " + a.out + "/perturbed.jsonl");
    std::size_t written = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        check_interrupt(&g_interrupt);
        if (prompts[i].empty())
            throw ValidationError("prompt line " + std::to_string(i + 1) + " is empty");
        PerturbationConfig cfg = config_for_prompt(config, i);
        std::vector<double> importance;
        const std::vector<double>* imp = nullptr;
        if (a.adaptive) {
            importance = scorer.score(prompts[i]);
            imp = &importance;
        }
        jl << perturbed_to_json(perturb_prompt(table, prompts[i], cfg, imp)).dump() << '\n';
        ++written;
    }
    jl.close();

    Manifest m;
    m.command = "perturb";
    m.seed = a.seed;
    m.epsilon = a.epsilon;
    m.backend_id = "";
    m.input_hashes["embeddings"] = fnv1a64_file(a.embeddings);
    m.input_hashes["prompts"] = fnv1a64_file(a.prompts);
    m.counts["written"] = static_cast<std::int64_t>(written);
    m.complete = true;
    write_manifest(m, a.out + "/manifest.json");
    std::cout << "wrote " << written << " perturbed prompts to " << a.out << "/perturbed.jsonl\n";
    return 0;
}

// -------------------------------------------------------------- verify-dp

struct VerifyArgs {
    std::string embeddings, out;
    double epsilon = 1.0;
    bool inject_fault = false;
};

int cmd_verify_dp(const VerifyArgs& a) {
    EmbeddingTable table = load_embeddings(a.embeddings);
    DistributionFn dist;
    if (a.inject_fault) {
        // The classic non-private bug: deterministic argmax selection
        // instead of sampling. Guaranteed to blow the bound.
        dist = [](const EmbeddingTable& t, const Token& x, double eps,
                  const std::vector<Token>& cands) {
            std::vector<double> p = em_distribution(t, x, eps, cands);
            std::size_t best = 0;
            for (std::size_t i = 1; i < p.size(); ++i)
                if (p[i] > p[best]) best = i;
            std::fill(p.begin(), p.end(), 0.0);
            p[best] = 1.0;
            return p;
        };
    }
    DpBoundReport report = verify_dp_bound(table, a.epsilon, table.tokens(), dist);

    Json j{{"epsilon", report.epsilon},
           {"bound", report.bound},
           {"max_ratio", report.max_ratio},
           {"worst",
            Json{{"x", report.worst.x},
                 {"x_prime", report.worst.x_prime},
                 {"output", report.worst.worst_output}}},
           {"pass", report.pass}};
    Json pairs = Json::array();
    std::size_t limit = std::min<std::size_t>(report.pairs.size(), 20);
    std::vector<DpPairRatio> sorted = report.pairs;
    std::sort(sorted.begin(), sorted.end(),
              [](const DpPairRatio& l, const DpPairRatio& r) { return l.max_ratio > r.max_ratio; });
    for (std::size_t i = 0; i < limit; ++i)
        pairs.push_back(Json{{"x", sorted[i].x},
                             {"x_prime", sorted[i].x_prime},
                             {"output", sorted[i].worst_output},
                             {"max_ratio", sorted[i].max_ratio}});
    j["worst_pairs"] = pairs;

    std::string text = j.dump(2) + "\n";
    if (!a.out.empty()) {
        std::ofstream f(a.out, std::ios::binary);
        if (!f) throw ValidationError("cannot open for writing: " + a.out);
        f << text;
    }
    std::cout << text;
    std::cout << (report.pass ? "PASS" : "FAIL") << ": max ratio " << report.max_ratio
              << " vs bound e^eps = " << report.bound << "\n";
    return report.pass ? 0 : 2;
}

// ------------------------------------------------------------------ serve

struct ServeArgs {
    std::string addr = "127.0.0.1:7421";
    BackendFlags backend;
};

std::pair<std::string, std::uint16_t> split_addr(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw ValidationError("address must be host:port: " + addr);
    int port = std::stoi(addr.substr(colon + 1));
    if (port < 0 || port > 65535) throw ValidationError("port out of range: " + addr);
    return {addr.substr(0, colon), static_cast<std::uint16_t>(port)};
}

int cmd_serve(const ServeArgs& a) {
    auto [host, port] = split_addr(a.addr);
    auto backend = a.backend.make();
    auto handle = serve(host, port, backend);
    std::cout << "serving " << backend->id() << " on " << host << ":" << handle->port()
              << " (Ctrl-C to stop)\n";
    while (!g_interrupt.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    handle->stop();
    std::cout << "stopped\n";
    return 0;
}

// -------------------------------------------------------------------- run

struct RunArgs {
    std::string embeddings, prompts, labels, out;
    std::string addr;           // connect to a remote serve instance instead
    std::string manifest_path;  // replay seed/epsilon from a prior manifest
    std::string decoder = "repair";
    std::string public_prompts;  // pool for the icl decoder
    std::string task = "qa";
    double epsilon = 1.0;
    double repair_threshold = 0.8;
    std::uint64_t seed = 0;
    std::size_t parallelism = 1;
    std::size_t k_demos = 3;
    bool adaptive = false;
    BackendFlags backend;
};

int cmd_run(RunArgs a) {
    if (!a.manifest_path.empty()) {
        Manifest prior = read_manifest(a.manifest_path);
        a.seed = prior.seed;
        a.epsilon = prior.epsilon;
        auto check_hash = [&](const std::string& key, const std::string& path) {
            auto it = prior.input_hashes.find(key);
            if (it == prior.input_hashes.end()) return;
            if (fnv1a64_file(path) != it->second)
                throw ValidationError("input '" + key + "' does not match manifest fingerprint");
        };
        check_hash("embeddings", a.embeddings);
        check_hash("prompts", a.prompts);
        check_hash("labels", a.labels);
    }
    a.backend.seed = a.seed;

    EmbeddingTable table = load_embeddings(a.embeddings);
    auto prompts = read_prompt_lines(a.prompts);
    auto labels = read_prompt_lines(a.labels);
    if (prompts.size() != labels.size())
        throw ValidationError("--prompts and --labels must have the same number of lines");
    ensure_out_dir(a.out);

    PerturbationConfig config;
    config.epsilon = a.epsilon;
    config.rng_seed = a.seed;
    if (a.adaptive) config.allocation = BudgetAllocation::adaptive;
    config.validate();

    std::shared_ptr<Transport> transport;
    std::shared_ptr<LoopbackTransport> loopback;
    std::string backend_id;
    if (!a.addr.empty()) {
        auto [host, port] = split_addr(a.addr);
        transport = std::make_shared<TcpTransport>(host, port);
        backend_id = "remote:" + a.addr;
    } else {
        auto backend = a.backend.make();
        backend_id = backend->id();
        loopback = std::make_shared<LoopbackTransport>(std::move(backend));
        transport = loopback;
    }
    RationaleClient client(transport);

    RationaleDecoder decoder;
    if (a.decoder == "identity") {
        decoder = identity_decoder();
    } else if (a.decoder == "repair") {
        decoder = repair_decoder(table, a.repair_threshold);
    } else if (a.decoder == "icl") {
        if (a.public_prompts.empty())
            throw ValidationError("--decoder icl requires --public-prompts");
        auto pub = read_prompt_lines(a.public_prompts);
        auto backend = a.backend.make();
        auto pool_result = build_decoder_dataset(pub, table, config, client,
                                                 raw_backend_fn(backend), a.task, nullptr,
                                                 &g_interrupt);
        auto pool = std::make_shared<std::vector<DecoderExample>>(std::move(pool_result.items));
        if (pool->size() < a.k_demos)
            throw ValidationError("public pool smaller than --k-demos");
        decoder = icl_decoder(pool, a.k_demos, table, backend);
    } else {
        throw ValidationError("unknown decoder: " + a.decoder);
    }

    IdfScorer scorer(prompts);
    auto result = run_pipeline(prompts, labels, table, config, client, decoder, a.task,
                               a.parallelism, a.adaptive ? &scorer : nullptr, &g_interrupt);

    write_jsonl(result.items, a.out + "/distill.jsonl");
    if (a.backend.backend == "loopback" && loopback) {
        std::ofstream f(a.out + "/frames.jsonl", std::ios::binary);
        for (const auto& line : loopback->captured_frames()) f << line << '\n';
    }

    std::int64_t label_only = 0;
    for (const auto& e : result.items) label_only += e.label_only ? 1 : 0;
    Manifest m;
    m.command = "run";
    m.seed = a.seed;
    m.epsilon = a.epsilon;
    m.backend_id = backend_id;
    m.input_hashes["embeddings"] = fnv1a64_file(a.embeddings);
    m.input_hashes["prompts"] = fnv1a64_file(a.prompts);
    m.input_hashes["labels"] = fnv1a64_file(a.labels);
    m.counts["written"] = static_cast<std::int64_t>(result.items.size());
    m.counts["skipped"] = static_cast<std::int64_t>(result.skips.size());
    m.counts["label_only"] = label_only;
    m.complete = true;
    write_manifest(m, a.out + "/manifest.json");
    std::cout << "wrote " << result.items.size() << " examples (" << result.skips.size()
              << " skipped, " << label_only << " label-only) to " << a.out << "/distill.jsonl\n";
    return 0;
}

// ------------------------------------------------------------------ sweep

struct SweepArgs {
    std::string embeddings, prompts, out;
    std::vector<double> epsilons;
    std::string decoder = "repair";
    double repair_threshold = 0.8;
    std::uint64_t seed = 0;
    BackendFlags backend;
};

int cmd_sweep(const SweepArgs& a) {
    EmbeddingTable table = load_embeddings(a.embeddings);
    auto prompts = read_prompt_lines(a.prompts);
    ensure_out_dir(a.out);
    auto backend = a.backend.make();
    RationaleDecoder decoder = a.decoder == "identity"
                                   ? identity_decoder()
                                   : repair_decoder(table, a.repair_threshold);
    SweepReport report =
        epsilon_sweep(prompts, table, a.epsilons, *backend, decoder, a.seed, &g_interrupt);
    write_sweep_csv(report, a.out + "/sweep.csv");
    write_sweep_detail_jsonl(report, a.out + "/sweep_detail.jsonl");

    Manifest m;
    m.command = "sweep";
    m.seed = a.seed;
    m.epsilons = a.epsilons;
    m.backend_id = backend->id();
    m.input_hashes["embeddings"] = fnv1a64_file(a.embeddings);
    m.input_hashes["prompts"] = fnv1a64_file(a.prompts);
    m.counts["rows"] = static_cast<std::int64_t>(report.rows.size());
    m.counts["examples"] = static_cast<std::int64_t>(report.examples.size());
    m.counts["skipped"] = static_cast<std::int64_t>(report.skips.size());
    m.complete = true;
    write_manifest(m, a.out + "/manifest.json");
    for (const auto& row : report.rows)
        std::cout << "eps " << row.epsilon << ": perturbed " << row.mean_perturbed_ratio
                  << " decoded " << row.mean_decoded_ratio << " (n=" << row.n << ")\n";
    return 0;
}

// ------------------------------------------------------------ distill-toy

struct DistillToyArgs {
    std::string out;
    std::string data;  // optional distill.jsonl from a run
    double learning_rate = 0.5;
    double alpha = 0.5, beta = 0.5;
    std::size_t epochs = 500;
    std::size_t batch_size = 0;
    std::size_t dim = 8;
    std::uint64_t seed = 7;
};

int cmd_distill_toy(const DistillToyArgs& a) {
    ensure_out_dir(a.out);
    std::vector<DistillExample> data;
    std::vector<Token> vocab;
    if (a.data.empty()) {
        ToyTask task = make_toy_task(a.seed);
        data = std::move(task.data);
        vocab = std::move(task.vocab);
    } else {
        data = read_jsonl<DistillExample>(a.data, distill_example_from_json);
        std::unordered_set<std::string> seen;
        for (const auto& ex : data)
            for (const auto* part : {&ex.input, &ex.label, &ex.rationale})
                for (const auto& t : *part)
                    if (seen.insert(t.text).second) vocab.push_back(t);
        if (data.empty()) throw ValidationError("no examples in " + a.data);
    }
    ToyModel model = ToyModel::random_init(vocab, a.dim, a.seed);
    LossWeights weights{a.alpha, a.beta};
    TrainConfig config{a.learning_rate, a.epochs, a.batch_size, a.seed};
    TrainResult result = train_l2(std::move(model), data, weights, config);

    write_trace_csv(result.trace, a.out + "/trace.csv", "label_loss", "rationale_loss");
    write_checkpoint(result.model, a.out + "/model.json");

    Manifest m;
    m.command = "distill-toy";
    m.seed = a.seed;
    m.backend_id = "";
    if (!a.data.empty()) m.input_hashes["data"] = fnv1a64_file(a.data);
    m.counts["examples"] = static_cast<std::int64_t>(data.size());
    m.counts["epochs"] = static_cast<std::int64_t>(a.epochs);
    m.complete = true;
    write_manifest(m, a.out + "/manifest.json");

    double initial = result.trace.front().total;
    double final_loss = result.trace.back().total;
    std::cout << "loss " << initial << " -> " << final_loss << " over " << a.epochs
              << " epochs\n";
    return 0;
}

// --------------------------------------------------------- gen-embeddings

struct GenArgs {
    std::string out;
    std::string style = "clustered";  // clustered | separated
    std::size_t tokens = 100;
    std::size_t dim = 16;
    std::size_t clusters = 5;
    double spread = 0.1;
    double max_cosine = 0.6;
    std::uint64_t seed = 7;
};

int cmd_gen_embeddings(const GenArgs& a) {
    EmbeddingTable table;
    if (a.style == "clustered") {
        if (a.clusters == 0 || a.tokens % a.clusters != 0)
            throw ValidationError("--tokens must be a positive multiple of --clusters");
        table = make_clustered_table(a.clusters, a.tokens / a.clusters, a.dim, a.spread, a.seed);
    } else if (a.style == "separated") {
        table = make_separated_table(a.tokens, a.dim, a.seed, a.max_cosine);
    } else {
        throw ValidationError("unknown style: " + a.style);
    }
    save_embeddings(table, a.out);
    std::cout << "wrote " << table.size() << " x " << table.dim() << " embeddings to " << a.out
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_sigint);

    CLI::App app{"privcot: privacy-preserving chain-of-thought distillation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from an INI/TOML file");
    app.failure_message(CLI::FailureMessage::help);

    PerturbArgs perturb_args;
    auto* perturb = app.add_subcommand("perturb", "Token-level private perturbation of prompts");
    perturb->add_option("--embeddings", perturb_args.embeddings, "Embedding file")
        ->required()->envname("PRIVCOT_EMBEDDINGS");
    perturb->add_option("--prompts", perturb_args.prompts, "Prompt file, one per line")->required();
    perturb->add_option("--epsilon", perturb_args.epsilon, "Per-token privacy budget")
        ->required()->check(CLI::PositiveNumber);
    perturb->add_option("--epsilon-cap", perturb_args.epsilon_cap,
                        "Adaptive per-token cap (default 2x epsilon)");
    perturb->add_option("--seed", perturb_args.seed, "RNG seed")->required();
    perturb->add_flag("--adaptive", perturb_args.adaptive,
                      "Adaptive budgets from inverse document frequency");
    perturb->add_option("--out", perturb_args.out, "Output directory")->required();

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify-dp", "Exact verification of the e^eps bound");
    verify->add_option("--embeddings", verify_args.embeddings, "Embedding file")
        ->required()->envname("PRIVCOT_EMBEDDINGS");
    verify->add_option("--epsilon", verify_args.epsilon, "Privacy budget to verify")
        ->required()->check(CLI::NonNegativeNumber);
    verify->add_option("--out", verify_args.out, "Write the JSON report here too");
    verify->add_flag("--inject-fault", verify_args.inject_fault,
                     "Self-test: swap in a non-private argmax mechanism (must FAIL)");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "NDJSON rationale server");
    serve_cmd->add_option("--addr", serve_args.addr, "host:port to bind")->capture_default_str();
    add_backend_flags(serve_cmd, serve_args.backend);
    serve_cmd->add_option("--seed", serve_args.backend.seed, "Mock backend seed");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Private end-to-end run: perturb, exchange, decode");
    run->add_option("--embeddings", run_args.embeddings, "Embedding file")
        ->required()->envname("PRIVCOT_EMBEDDINGS");
    run->add_option("--prompts", run_args.prompts, "Private prompts, one per line")->required();
    run->add_option("--labels", run_args.labels, "Labels aligned with prompts")->required();
    run->add_option("--epsilon", run_args.epsilon, "Per-token privacy budget")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", run_args.seed, "RNG seed");
    run->add_option("--out", run_args.out, "Output directory")->required();
    run->add_option("--addr", run_args.addr, "Connect to a running server at host:port");
    run->add_option("--manifest", run_args.manifest_path,
                    "Replay seed/epsilon from a prior manifest and verify input fingerprints");
    run->add_option("--decoder", run_args.decoder, "identity | repair | icl")
        ->check(CLI::IsMember({"identity", "repair", "icl"}))->capture_default_str();
    run->add_option("--repair-threshold", run_args.repair_threshold,
                    "Similarity needed before the repair decoder rewrites a word")
        ->capture_default_str();
    run->add_option("--public-prompts", run_args.public_prompts,
                    "Public prompts used to build the icl decoder pool");
    run->add_option("--k-demos", run_args.k_demos, "Demonstrations per icl context")
        ->capture_default_str();
    run->add_option("--task", run_args.task, "Task tag sent with each request")
        ->capture_default_str();
    run->add_option("--parallelism", run_args.parallelism, "Concurrent prompts")
        ->capture_default_str();
    run->add_flag("--adaptive", run_args.adaptive,
                  "Adaptive budgets from inverse document frequency");
    add_backend_flags(run, run_args.backend);

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "TokenRatio vs epsilon harness");
    sweep->add_option("--embeddings", sweep_args.embeddings, "Embedding file")
        ->required()->envname("PRIVCOT_EMBEDDINGS");
    sweep->add_option("--prompts", sweep_args.prompts, "Prompts, one per line")->required();
    sweep->add_option("--epsilons", sweep_args.epsilons, "Budgets, strictly increasing")
        ->required()->delimiter(',');
    sweep->add_option("--seed", sweep_args.seed, "RNG seed")->required();
    sweep->add_option("--out", sweep_args.out, "Output directory")->required();
    sweep->add_option("--decoder", sweep_args.decoder, "identity | repair")
        ->check(CLI::IsMember({"identity", "repair"}))->capture_default_str();
    sweep->add_option("--repair-threshold", sweep_args.repair_threshold,
                      "Similarity needed before the repair decoder rewrites a word")
        ->capture_default_str();
    add_backend_flags(sweep, sweep_args.backend);
    sweep->add_option("--backend-seed", sweep_args.backend.seed, "Mock backend seed");

    DistillToyArgs toy_args;
    auto* toy = app.add_subcommand("distill-toy",
                                   "Multi-task distillation on the reference toy model");
    toy->add_option("--out", toy_args.out, "Output directory")->required();
    toy->add_option("--data", toy_args.data, "Optional distill.jsonl from a run");
    toy->add_option("--lr", toy_args.learning_rate, "Learning rate")->capture_default_str();
    toy->add_option("--alpha", toy_args.alpha, "Label loss weight")->capture_default_str();
    toy->add_option("--beta", toy_args.beta, "Rationale loss weight")->capture_default_str();
    toy->add_option("--epochs", toy_args.epochs, "Training epochs")->capture_default_str();
    toy->add_option("--batch-size", toy_args.batch_size, "0 = full batch")->capture_default_str();
    toy->add_option("--dim", toy_args.dim, "Embedding width")->capture_default_str();
    toy->add_option("--seed", toy_args.seed, "RNG seed")->capture_default_str();

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen-embeddings", "Write a synthetic embedding fixture");
    gen->add_option("--out", gen_args.out, "Output embedding file")->required();
    gen->add_option("--style", gen_args.style, "clustered | separated")
        ->check(CLI::IsMember({"clustered", "separated"}))->capture_default_str();
    gen->add_option("--tokens", gen_args.tokens, "Vocabulary size")->capture_default_str();
    gen->add_option("--dim", gen_args.dim, "Vector dimension")->capture_default_str();
    gen->add_option("--clusters", gen_args.clusters, "Cluster count (clustered style)")
        ->capture_default_str();
    gen->add_option("--spread", gen_args.spread, "In-cluster noise (clustered style)")
        ->capture_default_str();
    gen->add_option("--max-cosine", gen_args.max_cosine, "Pairwise cap (separated style)")
        ->capture_default_str();
    gen->add_option("--seed", gen_args.seed, "RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*perturb) return cmd_perturb(perturb_args);
        if (*verify) return cmd_verify_dp(verify_args);
        if (*serve_cmd) return cmd_serve(serve_args);
        if (*run) return cmd_run(run_args);
        if (*sweep) return cmd_sweep(sweep_args);
        if (*toy) return cmd_distill_toy(toy_args);
        if (*gen) return cmd_gen_embeddings(gen_args);
    } catch (const Interrupted&) {
        // Flush a partial manifest so the output dir is self-describing.
        auto write_partial = [&](const std::string& out, const std::string& command) {
            if (out.empty()) return;
            Manifest m;
            m.command = command;
            m.complete = false;
            std::error_code ec;
            fs::create_directories(out, ec);
            try {
                write_manifest(m, out + "/manifest.json");
            } catch (...) {
            }
        };
        if (*perturb) write_partial(perturb_args.out, "perturb");
        if (*run) write_partial(run_args.out, "run");
        if (*sweep) write_partial(sweep_args.out, "sweep");
        std::cerr << "interrupted\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
