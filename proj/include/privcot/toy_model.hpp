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
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "privcot/datasets.hpp"
#include "privcot/errors.hpp"
#include "privcot/rng.hpp"
#include "privcot/token.hpp"

namespace privcot {

// Minimal differentiable classifier/generator: bag-of-words mean embedding,
// one linear layer, softmax over the vocabulary. Targets factor
// autoregressively with teacher forcing — at step t the mean embedding of
// the target prefix is added to the input encoding. Small enough that every
// gradient is hand-checkable, rich enough that label and rationale targets
// are both non-trivial.
class ToyModel {
public:
    ToyModel() = default;

    ToyModel(std::vector<Token> vocab, std::size_t dim)
        : vocab_(std::move(vocab)), dim_(dim) {
        for (std::size_t i = 0; i < vocab_.size(); ++i) {
            if (!index_.emplace(vocab_[i].text, i).second)
                throw ValidationError("duplicate token in model vocabulary: " + vocab_[i].text);
        }
        emb.assign(vocab_.size() * dim_, 0.0);
        out_w.assign(dim_ * vocab_.size(), 0.0);
        bias.assign(vocab_.size(), 0.0);
    }

    static ToyModel random_init(std::vector<Token> vocab, std::size_t dim, std::uint64_t seed,
                                double scale = 0.1) {
        ToyModel m(std::move(vocab), dim);
        Rng rng(derive_seed(seed, 0x70f));
        for (auto& v : m.emb) v = scale * rng.next_gaussian();
        for (auto& v : m.out_w) v = scale * rng.next_gaussian();
        return m;
    }

    std::size_t vocab_size() const { return vocab_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<Token>& vocab() const { return vocab_; }

    std::size_t require_index(const Token& t) const {
        auto it = index_.find(t.text);
        if (it == index_.end())
            throw OutOfVocabularyError("token not in model vocabulary: '" + t.text + "'");
        return it->second;
    }

    // Mean embedding of a token list; zero vector for an empty list.
    std::vector<double> mean_embedding(const std::vector<Token>& tokens) const {
        std::vector<double> h(dim_, 0.0);
        if (tokens.empty()) return h;
        for (const auto& t : tokens) {
            const double* row = emb.data() + require_index(t) * dim_;
            for (std::size_t k = 0; k < dim_; ++k) h[k] += row[k];
        }
        for (auto& v : h) v /= static_cast<double>(tokens.size());
        return h;
    }

    // Softmax over logits W^T h + b; log-space with max-subtraction.
    std::vector<double> step_distribution(const std::vector<double>& h) const {
        std::vector<double> logits(vocab_.size());
        for (std::size_t j = 0; j < vocab_.size(); ++j) {
            double z = bias[j];
            for (std::size_t k = 0; k < dim_; ++k) z += out_w[k * vocab_.size() + j] * h[k];
            logits[j] = z;
        }
        double mx = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (auto& z : logits) {
            z = std::exp(z - mx);
            sum += z;
        }
        for (auto& z : logits) z /= sum;
        return logits;
    }

    // Step distribution for (input bag, target prefix) — the model's forward.
    std::vector<double> step_distribution(const std::vector<Token>& input,
                                          const std::vector<Token>& prefix) const {
        std::vector<double> h = mean_embedding(input);
        if (!prefix.empty()) {
            std::vector<double> ph = mean_embedding(prefix);
            for (std::size_t k = 0; k < dim_; ++k) h[k] += ph[k];
        }
        return step_distribution(h);
    }

    std::vector<double> emb;    // vocab_size x dim, row-major
    std::vector<double> out_w;  // dim x vocab_size, row-major
    std::vector<double> bias;   // vocab_size

private:
    std::vector<Token> vocab_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t dim_ = 0;
};

// Mean over target positions of -log p(target_t | input, target_{<t}).
inline double sequence_cross_entropy(const ToyModel& model, const std::vector<Token>& input,
                                     const std::vector<Token>& target) {
    if (target.empty()) throw ValidationError("target must be non-empty");
    double total = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        std::vector<Token> prefix(target.begin(), target.begin() + t);
        std::vector<double> p = model.step_distribution(input, prefix);
        double py = p[model.require_index(target[t])];
        total += -std::log(std::max(py, 1e-300));
    }
    return total / static_cast<double>(target.size());
}

struct LossWeights {
    double alpha = 0.5;
    double beta = 0.5;

    void validate() const {
        if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
            throw ValidationError("loss weights must be nonnegative and finite");
    }
};

inline std::vector<Token> concat_tokens(std::initializer_list<const std::vector<Token>*> parts) {
    std::vector<Token> out;
    for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
    return out;
}

inline double encoder_loss(const ToyModel& model, const std::vector<EncoderPair>& batch) {
    if (batch.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& ex : batch) sum += sequence_cross_entropy(model, ex.prompt, ex.perturbed);
    return sum / static_cast<double>(batch.size());
}

inline double decoder_loss(const ToyModel& model, const std::vector<DecoderExample>& batch) {
    if (batch.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& ex : batch) {
        auto input = concat_tokens({&ex.prompt, &ex.perturbed_prompt, &ex.perturbed_rationale});
        sum += sequence_cross_entropy(model, input, ex.rationale);
    }
    return sum / static_cast<double>(batch.size());
}

// Multi-task objective of the encoder-decoder role: reproduce the
// perturbation from the raw prompt, and the raw rationale from the exchange.
inline double loss_l1(const ToyModel& model, const std::vector<EncoderPair>& encoder_batch,
                      const std::vector<DecoderExample>& decoder_batch) {
    if (encoder_batch.empty() && decoder_batch.empty())
        throw ValidationError("both batches empty");
    return encoder_loss(model, encoder_batch) + decoder_loss(model, decoder_batch);
}

inline double label_loss(const ToyModel& model, const std::vector<DistillExample>& batch) {
    if (batch.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& ex : batch) sum += sequence_cross_entropy(model, ex.input, ex.label);
    return sum / static_cast<double>(batch.size());
}

inline double rationale_loss(const ToyModel& model, const std::vector<DistillExample>& batch) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& ex : batch) {
        if (ex.label_only || ex.rationale.empty()) continue;
        sum += sequence_cross_entropy(model, ex.input, ex.rationale);
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

// Task-specific multi-task objective: alpha * label CE + beta * rationale CE.
// Label-only examples contribute to the label term only.
inline double loss_l2(const ToyModel& model, const std::vector<DistillExample>& batch,
                      const LossWeights& weights) {
    if (batch.empty()) throw ValidationError("batch must be non-empty");
    weights.validate();
    return weights.alpha * label_loss(model, batch) + weights.beta * rationale_loss(model, batch);
}

// Parameter-shaped gradient container.
struct Gradients {
    std::vector<double> emb;
    std::vector<double> out_w;
    std::vector<double> bias;

    static Gradients zeros_like(const ToyModel& m) {
        return {std::vector<double>(m.emb.size(), 0.0), std::vector<double>(m.out_w.size(), 0.0),
                std::vector<double>(m.bias.size(), 0.0)};
    }

    void axpy(double a, const Gradients& g) {
        for (std::size_t i = 0; i < emb.size(); ++i) emb[i] += a * g.emb[i];
        for (std::size_t i = 0; i < out_w.size(); ++i) out_w[i] += a * g.out_w[i];
        for (std::size_t i = 0; i < bias.size(); ++i) bias[i] += a * g.bias[i];
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : emb) m = std::max(m, std::abs(v));
        for (double v : out_w) m = std::max(m, std::abs(v));
        for (double v : bias) m = std::max(m, std::abs(v));
        return m;
    }
};

namespace detail {

// Accumulates d(mean CE)/d(params) for one (input, target) sequence, scaled
// by `scale`. Standard softmax cross-entropy backprop.
inline void accumulate_sequence_grad(const ToyModel& model, const std::vector<Token>& input,
                                     const std::vector<Token>& target, double scale,
                                     Gradients& grad) {
    if (target.empty()) throw ValidationError("target must be non-empty");
    const std::size_t v = model.vocab_size();
    const std::size_t d = model.dim();
    const double inv_t = 1.0 / static_cast<double>(target.size());

    std::vector<std::size_t> input_idx(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) input_idx[i] = model.require_index(input[i]);
    std::vector<double> x_enc = model.mean_embedding(input);

    for (std::size_t t = 0; t < target.size(); ++t) {
        std::vector<Token> prefix(target.begin(), target.begin() + t);
        std::vector<double> h = x_enc;
        if (t > 0) {
            std::vector<double> ph = model.mean_embedding(prefix);
            for (std::size_t k = 0; k < d; ++k) h[k] += ph[k];
        }
        std::vector<double> p = model.step_distribution(h);
        std::size_t yt = model.require_index(target[t]);

        // dL/dlogits = p - onehot(y_t), one position's share of the mean.
        std::vector<double> g(v);
        for (std::size_t j = 0; j < v; ++j) g[j] = p[j];
        g[yt] -= 1.0;
        const double w = scale * inv_t;

        for (std::size_t j = 0; j < v; ++j) grad.bias[j] += w * g[j];
        for (std::size_t k = 0; k < d; ++k) {
            const double hk = h[k];
            double dh = 0.0;
            for (std::size_t j = 0; j < v; ++j) {
                grad.out_w[k * v + j] += w * hk * g[j];
                dh += model.out_w[k * v + j] * g[j];
            }
            // dh flows into the input bag and the prefix bag.
            if (!input.empty()) {
                const double wi = w * dh / static_cast<double>(input.size());
                for (std::size_t i : input_idx) grad.emb[i * d + k] += wi;
            }
            if (t > 0) {
                const double wp = w * dh / static_cast<double>(t);
                for (std::size_t i = 0; i < t; ++i)
                    grad.emb[model.require_index(target[i]) * d + k] += wp;
            }
        }
    }
}

}  // namespace detail

inline Gradients grad_l1(const ToyModel& model, const std::vector<EncoderPair>& encoder_batch,
                         const std::vector<DecoderExample>& decoder_batch) {
    if (encoder_batch.empty() && decoder_batch.empty())
        throw ValidationError("both batches empty");
    Gradients g = Gradients::zeros_like(model);
    if (!encoder_batch.empty()) {
        double s = 1.0 / static_cast<double>(encoder_batch.size());
        for (const auto& ex : encoder_batch)
            detail::accumulate_sequence_grad(model, ex.prompt, ex.perturbed, s, g);
    }
    if (!decoder_batch.empty()) {
        double s = 1.0 / static_cast<double>(decoder_batch.size());
        for (const auto& ex : decoder_batch) {
            auto input = concat_tokens({&ex.prompt, &ex.perturbed_prompt, &ex.perturbed_rationale});
            detail::accumulate_sequence_grad(model, input, ex.rationale, s, g);
        }
    }
    return g;
}

inline Gradients grad_l2(const ToyModel& model, const std::vector<DistillExample>& batch,
                         const LossWeights& weights) {
    if (batch.empty()) throw ValidationError("batch must be non-empty");
    weights.validate();
    Gradients g = Gradients::zeros_like(model);
    double s_label = weights.alpha / static_cast<double>(batch.size());
    std::size_t n_rat = 0;
    for (const auto& ex : batch)
        if (!ex.label_only && !ex.rationale.empty()) ++n_rat;
    double s_rat = n_rat ? weights.beta / static_cast<double>(n_rat) : 0.0;
    for (const auto& ex : batch) {
        if (s_label != 0.0) detail::accumulate_sequence_grad(model, ex.input, ex.label, s_label, g);
        if (s_rat != 0.0 && !ex.label_only && !ex.rationale.empty())
            detail::accumulate_sequence_grad(model, ex.input, ex.rationale, s_rat, g);
    }
    return g;
}

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t epochs = 100;
    std::size_t batch_size = 0;  // 0 means full batch
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
            throw ValidationError("learning_rate must be nonnegative and finite");
        if (epochs < 1) throw ValidationError("epochs must be >= 1");
    }
};

struct TraceRow {
    std::size_t epoch = 0;  // 0 is the pre-training loss
    double total = 0.0;
    double part_a = 0.0;  // encoder / label component (already weighted)
    double part_b = 0.0;  // decoder / rationale component (already weighted)
};

struct TrainResult {
    ToyModel model;
    std::vector<TraceRow> trace;
};

namespace detail {

inline void sgd_step(ToyModel& model, const Gradients& g, double lr) {
    for (std::size_t i = 0; i < model.emb.size(); ++i) model.emb[i] -= lr * g.emb[i];
    for (std::size_t i = 0; i < model.out_w.size(); ++i) model.out_w[i] -= lr * g.out_w[i];
    for (std::size_t i = 0; i < model.bias.size(); ++i) model.bias[i] -= lr * g.bias[i];
}

inline void check_finite(double loss, std::size_t epoch) {
    if (!std::isfinite(loss))
        throw DivergenceError("loss diverged (non-finite) at epoch " + std::to_string(epoch));
}

}  // namespace detail

// Plain gradient descent on the task-specific objective. Examples are
// shuffled once per epoch from the config seed; the trace records the
// full-data loss after each epoch (row 0 is the initial loss).
inline TrainResult train_l2(ToyModel model, const std::vector<DistillExample>& data,
                            const LossWeights& weights, const TrainConfig& config) {
    config.validate();
    if (data.empty()) throw ValidationError("training data must be non-empty");
    Rng rng(derive_seed(config.seed, 0x7e2));
    std::vector<TraceRow> trace;
    auto record = [&](std::size_t epoch) {
        TraceRow row;
        row.epoch = epoch;
        row.part_a = weights.alpha * label_loss(model, data);
        row.part_b = weights.beta * rationale_loss(model, data);
        row.total = row.part_a + row.part_b;
        detail::check_finite(row.total, epoch);
        trace.push_back(row);
    };
    record(0);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t bs = config.batch_size == 0 ? data.size() : config.batch_size;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            std::vector<DistillExample> batch;
            for (std::size_t i = start; i < std::min(start + bs, order.size()); ++i)
                batch.push_back(data[order[i]]);
            detail::sgd_step(model, grad_l2(model, batch, weights), config.learning_rate);
        }
        record(epoch);
    }
    return {std::move(model), std::move(trace)};
}

// Same loop for the encoder-decoder objective.
inline TrainResult train_l1(ToyModel model, const std::vector<EncoderPair>& enc,
                            const std::vector<DecoderExample>& dec, const TrainConfig& config) {
    config.validate();
    if (enc.empty() && dec.empty()) throw ValidationError("training data must be non-empty");
    std::vector<TraceRow> trace;
    auto record = [&](std::size_t epoch) {
        TraceRow row;
        row.epoch = epoch;
        row.part_a = encoder_loss(model, enc);
        row.part_b = decoder_loss(model, dec);
        row.total = row.part_a + row.part_b;
        detail::check_finite(row.total, epoch);
        trace.push_back(row);
    };
    record(0);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        detail::sgd_step(model, grad_l1(model, enc, dec), config.learning_rate);
        record(epoch);
    }
    return {std::move(model), std::move(trace)};
}

inline void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path,
                            const std::string& part_a_name = "part_a",
                            const std::string& part_b_name = "part_b") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << "epoch,total," << part_a_name << ',' << part_b_name << '\n';
    out.precision(17);
    for (const auto& row : trace)
        out << row.epoch << ',' << row.total << ',' << row.part_a << ',' << row.part_b << '\n';
}

// Checkpoint: dimensions plus row-major parameter arrays as decimal text.
inline void write_checkpoint(const ToyModel& model, const std::string& path) {
    Json j{{"vocab", tokens_to_json(model.vocab())},
           {"dim", model.dim()},
           {"emb", model.emb},
           {"out_w", model.out_w},
           {"bias", model.bias}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

inline ToyModel read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid checkpoint JSON");
    ToyModel m(tokens_from_json(j.at("vocab")), j.at("dim").get<std::size_t>());
    m.emb = j.at("emb").get<std::vector<double>>();
    m.out_w = j.at("out_w").get<std::vector<double>>();
    m.bias = j.at("bias").get<std::vector<double>>();
    if (m.emb.size() != m.vocab_size() * m.dim() || m.out_w.size() != m.dim() * m.vocab_size() ||
        m.bias.size() != m.vocab_size())
        throw ParseError("checkpoint dimensions inconsistent");
    return m;
}

// Deterministic separable toy task: two word groups, two labels, rationales
// built from the same group words. N examples split evenly between groups.
struct ToyTask {
    std::vector<Token> vocab;
    std::vector<DistillExample> data;
};

inline ToyTask make_toy_task(std::uint64_t seed, std::size_t n_examples = 32) {
    const std::vector<std::string> group_a = {"sun", "warm", "light", "day", "bright"};
    const std::vector<std::string> group_b = {"moon", "cold", "dark", "night", "dim"};
    const std::vector<std::string> shared = {"it", "is", "because", "yes", "no"};
    ToyTask task;
    for (const auto& w : group_a) task.vocab.emplace_back(w);
    for (const auto& w : group_b) task.vocab.emplace_back(w);
    for (const auto& w : shared) task.vocab.emplace_back(w);
    Rng rng(derive_seed(seed, 0x7a5c));
    for (std::size_t i = 0; i < n_examples; ++i) {
        bool a = (i % 2) == 0;
        const auto& group = a ? group_a : group_b;
        DistillExample ex;
        for (std::size_t w = 0; w < 3; ++w)
            ex.input.emplace_back(group[rng.next_index(group.size())]);
        ex.label.emplace_back(a ? "yes" : "no");
        ex.rationale = {Token("because"), Token("it"), Token("is"),
                        Token(group[rng.next_index(group.size())])};
        task.data.push_back(std::move(ex));
    }
    return task;
}

}  // namespace privcot
