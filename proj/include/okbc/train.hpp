#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "okbc/autodiff.hpp"
#include "okbc/kb.hpp"
#include "okbc/text.hpp"
#include "okbc/transformer.hpp"

namespace okbc {

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 40;
    std::size_t patience = 5;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.98;
    double adam_eps = 1e-9;

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw InputError("train: learning_rate must be positive and finite");
        if (batch_size < 1) throw InputError("train: batch_size must be >= 1");
        if (max_epochs < 1) throw InputError("train: max_epochs must be >= 1");
        if (patience < 1 || patience > max_epochs)
            throw InputError("train: patience must be in [1, max_epochs]");
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
            throw InputError("train: Adam betas must lie in [0, 1)");
        if (!(adam_eps > 0.0)) throw InputError("train: Adam eps must be positive");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss_bits = 0.0;
    double train_accuracy = 0.0;
    double val_loss_bits = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> records;
    std::size_t best_epoch = 0;  // 1-based epoch with minimum held-out loss
};

inline std::string serialize_history(const TrainHistory& history) {
    std::string out = "epoch,train_loss_bits,train_acc,val_loss_bits,val_acc\n";
    char buf[160];
    for (const EpochRecord& r : history.records) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss_bits,
                      r.train_accuracy, r.val_loss_bits, r.val_accuracy);
        out += buf;
    }
    return out;
}

// Next-token labels for a teacher-forced decoder: the logits row at position
// i scores target position i + 1, so the label sequence is the target
// shifted left by one. [end] is a real label; [pad] positions are masked out.
struct TeacherForcingTargets {
    std::vector<int> labels;
    std::vector<std::uint8_t> mask;
};

inline TeacherForcingTargets teacher_forcing_targets(const EncodedPair& pair) {
    const std::size_t n = pair.target_ids.size();
    TeacherForcingTargets t;
    t.labels.assign(n, kPadId);
    t.mask.assign(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        t.labels[i] = pair.target_ids[i + 1];
        t.mask[i] = pair.target_real[i + 1];
    }
    return t;
}

// Fraction of unmasked positions where the argmax prediction matches the
// target (ties resolved toward the lowest id).
inline double token_accuracy(const Tensor& logits, const std::vector<int>& targets,
                             const std::vector<std::uint8_t>& mask) {
    if (targets.size() != logits.rows() || mask.size() != logits.rows())
        throw ComputeError("token_accuracy: target/mask length mismatch");
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!mask[i]) continue;
        ++total;
        if (static_cast<int>(argmax_row(logits, i)) == targets[i]) ++correct;
    }
    if (total == 0) throw ComputeError("token_accuracy: all positions masked");
    return static_cast<double>(correct) / static_cast<double>(total);
}

struct EvalMetrics {
    double loss_bits = 0.0;
    double accuracy = 0.0;
};

namespace detail {

// Pooled token-level metrics: every unmasked position across the set weighs
// equally, so short and long objects mix consistently.
inline EvalMetrics evaluate_pairs(const ModelConfig& cfg, const TransformerParams& params,
                                  const std::vector<EncodedPair>& pairs) {
    if (pairs.empty()) throw InputError("evaluate: empty input");
    double bits_sum = 0.0;
    double correct_sum = 0.0;
    std::size_t total = 0;
    for (const EncodedPair& pair : pairs) {
        const TeacherForcingTargets tft = teacher_forcing_targets(pair);
        std::size_t cnt = 0;
        for (std::uint8_t m : tft.mask) cnt += m;
        Graph g;
        BoundParams bp = bind_params(g, params, cfg);
        ForwardOutput out = transformer_forward(g, cfg, bp, pair.input_ids, pair.target_ids,
                                                pair.input_real, pair.target_real);
        Var loss = cross_entropy_bits(out.logits, tft.labels, tft.mask);
        const double bits = g.value(loss).item();
        if (!std::isfinite(bits)) throw ComputeError("evaluate: non-finite loss");
        const double acc = token_accuracy(g.value(out.logits), tft.labels, tft.mask);
        bits_sum += bits * static_cast<double>(cnt);
        correct_sum += acc * static_cast<double>(cnt);
        total += cnt;
    }
    return {bits_sum / static_cast<double>(total), correct_sum / static_cast<double>(total)};
}

inline std::vector<EncodedPair> encode_kb(const KnowledgeBase& kb, const Vocabulary& vocab,
                                          std::size_t n) {
    std::vector<EncodedPair> pairs;
    pairs.reserve(kb.size());
    for (const Triple& t : kb.triples) pairs.push_back(encode_pair(t, vocab, n));
    return pairs;
}

}  // namespace detail

inline EvalMetrics evaluate(const ModelConfig& cfg, const TransformerParams& params,
                            const KnowledgeBase& kb, const Vocabulary& vocab) {
    if (kb.triples.empty()) throw InputError("evaluate: empty KB");
    return detail::evaluate_pairs(cfg, params, detail::encode_kb(kb, vocab, cfg.max_seq_len));
}

// Adam with bias correction; state tensors follow the canonical parameter
// enumeration order.
struct AdamState {
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    std::uint64_t step = 0;

    static AdamState init(const ModelConfig& cfg) {
        AdamState st;
        TransformerParams zeros = zero_params(cfg);
        zeros.for_each([&](const std::string&, const Tensor& t) {
            st.first_moment.push_back(Tensor::zeros(t.shape()));
            st.second_moment.push_back(Tensor::zeros(t.shape()));
        });
        return st;
    }
};

inline void adam_step(TransformerParams& params, const std::vector<Tensor>& grads, AdamState& st,
                      const TrainConfig& tc) {
    st.step += 1;
    const double bc1 = 1.0 - std::pow(tc.adam_beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(tc.adam_beta2, static_cast<double>(st.step));
    std::size_t k = 0;
    params.for_each([&](const std::string&, Tensor& t) {
        const Tensor& g = grads[k];
        Tensor& m = st.first_moment[k];
        Tensor& v = st.second_moment[k];
        for (std::size_t i = 0; i < t.numel(); ++i) {
            m[i] = tc.adam_beta1 * m[i] + (1.0 - tc.adam_beta1) * g[i];
            v[i] = tc.adam_beta2 * v[i] + (1.0 - tc.adam_beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            t[i] -= tc.learning_rate * m_hat / (std::sqrt(v_hat) + tc.adam_eps);
        }
        ++k;
    });
}

struct TrainResult {
    TransformerParams best_params;
    TrainHistory history;
};

// Teacher-forced training with seeded epoch shuffles, pooled-batch Adam
// updates, per-epoch held-out evaluation, and early stopping that restores
// the best held-out-loss weights.
inline TrainResult train(const ModelConfig& cfg, TransformerParams params,
                         const KnowledgeBase& train_kb, const KnowledgeBase& heldout_kb,
                         const Vocabulary& vocab, const TrainConfig& tc) {
    cfg.validate();
    tc.validate();
    if (train_kb.triples.empty() || heldout_kb.triples.empty())
        throw InputError("train: both KBs must be nonempty");
    if (vocab.size() != cfg.vocab_size)
        throw InputError("train: vocabulary size does not match model config");

    const std::vector<EncodedPair> train_pairs = detail::encode_kb(train_kb, vocab, cfg.max_seq_len);
    const std::vector<EncodedPair> heldout_pairs =
        detail::encode_kb(heldout_kb, vocab, cfg.max_seq_len);
    std::vector<TeacherForcingTargets> train_targets;
    train_targets.reserve(train_pairs.size());
    std::vector<std::size_t> target_counts;
    for (const EncodedPair& p : train_pairs) {
        train_targets.push_back(teacher_forcing_targets(p));
        std::size_t cnt = 0;
        for (std::uint8_t m : train_targets.back().mask) cnt += m;
        target_counts.push_back(cnt);
    }

    Rng rng(tc.seed);
    AdamState adam = AdamState::init(cfg);
    std::vector<Tensor> grad_accum;
    {
        TransformerParams zeros = zero_params(cfg);
        zeros.for_each([&](const std::string&, const Tensor& t) {
            grad_accum.push_back(Tensor::zeros(t.shape()));
        });
    }

    TrainHistory history;
    TransformerParams best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t epochs_without_improvement = 0;

    std::vector<std::size_t> order(train_pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t batch_start = 0; batch_start < order.size(); batch_start += tc.batch_size) {
            const std::size_t batch_end = std::min(batch_start + tc.batch_size, order.size());
            std::size_t batch_tokens = 0;
            for (std::size_t b = batch_start; b < batch_end; ++b) batch_tokens += target_counts[order[b]];
            if (batch_tokens == 0) continue;
            for (Tensor& t : grad_accum) t.fill(0.0);
            for (std::size_t b = batch_start; b < batch_end; ++b) {
                const std::size_t ex = order[b];
                const EncodedPair& pair = train_pairs[ex];
                Graph g;
                BoundParams bp = bind_params(g, params, cfg);
                ForwardOutput out = transformer_forward(g, cfg, bp, pair.input_ids, pair.target_ids,
                                                        pair.input_real, pair.target_real);
                Var loss = cross_entropy_bits(out.logits, train_targets[ex].labels, train_targets[ex].mask);
                const double loss_value = g.value(loss).item();
                if (!std::isfinite(loss_value))
                    throw ComputeError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                       ", example " + std::to_string(ex));
                // Example losses are token means; reweighting by token count
                // makes the batch objective the pooled token mean.
                g.backward(loss, static_cast<double>(target_counts[ex]) /
                                     static_cast<double>(batch_tokens));
                for (std::size_t k = 0; k < grad_accum.size(); ++k) {
                    const Tensor pg = g.param_grad(k);
                    for (std::size_t i = 0; i < pg.numel(); ++i) grad_accum[k][i] += pg[i];
                }
            }
            adam_step(params, grad_accum, adam, tc);
        }

        const EvalMetrics train_metrics = detail::evaluate_pairs(cfg, params, train_pairs);
        const EvalMetrics val_metrics = detail::evaluate_pairs(cfg, params, heldout_pairs);
        history.records.push_back({epoch, train_metrics.loss_bits, train_metrics.accuracy,
                                   val_metrics.loss_bits, val_metrics.accuracy});

        if (val_metrics.loss_bits < best_val) {
            best_val = val_metrics.loss_bits;
            best_params = params;
            history.best_epoch = epoch;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= tc.patience) break;
        }
    }
    return {std::move(best_params), std::move(history)};
}

}  // namespace okbc
