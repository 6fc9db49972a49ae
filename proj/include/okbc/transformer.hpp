#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "okbc/autodiff.hpp"
#include "okbc/rng.hpp"
#include "okbc/tensor.hpp"
#include "okbc/text.hpp"

namespace okbc {

inline constexpr double kLayerNormEps = 1e-6;

enum class PositionalEncoding { sinusoidal, learned };

struct ModelConfig {
    std::size_t max_seq_len = 30;  // both input and target are padded to this length
    std::size_t model_dim = 512;
    std::size_t ffn_dim = 2048;
    std::size_t num_heads = 8;
    std::size_t num_blocks = 1;
    std::size_t vocab_size = 0;
    PositionalEncoding positional = PositionalEncoding::sinusoidal;

    std::size_t head_dim() const { return model_dim / num_heads; }

    void validate() const {
        if (max_seq_len < 3) throw InputError("model: max_seq_len must be >= 3");
        if (model_dim == 0 || ffn_dim == 0 || num_heads == 0 || num_blocks == 0)
            throw InputError("model: dimensions must be positive");
        if (model_dim % num_heads != 0) throw InputError("model: model_dim must be divisible by num_heads");
        if (vocab_size < 5) throw InputError("model: vocab_size must be >= 5");
    }

    bool operator==(const ModelConfig&) const = default;
};

// The weight layout is generic over the stored handle so the same structure
// (and the same canonical enumeration order) serves both raw parameter
// tensors and their graph-bound counterparts.
template <typename T>
struct HeadWeights {
    T wq, wk, wv;  // each model_dim x head_dim
};

template <typename T>
struct AttnWeights {
    std::vector<HeadWeights<T>> heads;
    T merge;  // model_dim x model_dim, applied to the concatenated heads
};

template <typename T>
struct NormWeights {
    T gamma, beta;
};

template <typename T>
struct FfnWeights {
    T w1, b1, w2, b2;  // model_dim -> ffn_dim -> model_dim
};

template <typename T>
struct EncoderLayer {
    AttnWeights<T> attn;
    NormWeights<T> ln1;
    FfnWeights<T> ffn;
    NormWeights<T> ln2;
};

template <typename T>
struct DecoderLayer {
    AttnWeights<T> self_attn;
    NormWeights<T> ln1;
    AttnWeights<T> cross_attn;
    NormWeights<T> ln2;
    FfnWeights<T> ffn;
    NormWeights<T> ln3;
};

template <typename T>
struct ModelWeights {
    T token_embedding;                 // vocab_size x model_dim, shared by encoder and decoder
    std::optional<T> pos_embedding;    // max_seq_len x model_dim, learned-positions mode only
    std::vector<EncoderLayer<T>> encoder;
    std::vector<DecoderLayer<T>> decoder;
    T output_projection;  // model_dim x vocab_size

    // Canonical enumeration; checkpoint manifests, optimizer state and
    // gradient collection all follow this order.
    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        f("token_embedding", self.token_embedding);
        if (self.pos_embedding) f("pos_embedding", *self.pos_embedding);
        auto visit_attn = [&](const std::string& prefix, auto& attn) {
            for (std::size_t h = 0; h < attn.heads.size(); ++h) {
                const std::string hp = prefix + ".h" + std::to_string(h);
                f(hp + ".wq", attn.heads[h].wq);
                f(hp + ".wk", attn.heads[h].wk);
                f(hp + ".wv", attn.heads[h].wv);
            }
            f(prefix + ".merge", attn.merge);
        };
        auto visit_norm = [&](const std::string& prefix, auto& ln) {
            f(prefix + ".gamma", ln.gamma);
            f(prefix + ".beta", ln.beta);
        };
        auto visit_ffn = [&](const std::string& prefix, auto& ffn) {
            f(prefix + ".w1", ffn.w1);
            f(prefix + ".b1", ffn.b1);
            f(prefix + ".w2", ffn.w2);
            f(prefix + ".b2", ffn.b2);
        };
        for (std::size_t l = 0; l < self.encoder.size(); ++l) {
            const std::string lp = "enc" + std::to_string(l);
            visit_attn(lp + ".attn", self.encoder[l].attn);
            visit_norm(lp + ".ln1", self.encoder[l].ln1);
            visit_ffn(lp + ".ffn", self.encoder[l].ffn);
            visit_norm(lp + ".ln2", self.encoder[l].ln2);
        }
        for (std::size_t l = 0; l < self.decoder.size(); ++l) {
            const std::string lp = "dec" + std::to_string(l);
            visit_attn(lp + ".self", self.decoder[l].self_attn);
            visit_norm(lp + ".ln1", self.decoder[l].ln1);
            visit_attn(lp + ".cross", self.decoder[l].cross_attn);
            visit_norm(lp + ".ln2", self.decoder[l].ln2);
            visit_ffn(lp + ".ffn", self.decoder[l].ffn);
            visit_norm(lp + ".ln3", self.decoder[l].ln3);
        }
        f("output_projection", self.output_projection);
    }

    template <typename F>
    void for_each(F&& f) {
        visit(*this, std::forward<F>(f));
    }
    template <typename F>
    void for_each(F&& f) const {
        visit(*this, std::forward<F>(f));
    }
};

using TransformerParams = ModelWeights<Tensor>;
using BoundParams = ModelWeights<Var>;

namespace detail {

template <typename T>
ModelWeights<T> make_layout(const ModelConfig& cfg) {
    ModelWeights<T> w;
    if (cfg.positional == PositionalEncoding::learned) w.pos_embedding.emplace();
    auto attn = [&]() {
        AttnWeights<T> a;
        a.heads.resize(cfg.num_heads);
        return a;
    };
    w.encoder.resize(cfg.num_blocks);
    w.decoder.resize(cfg.num_blocks);
    for (auto& layer : w.encoder) layer.attn = attn();
    for (auto& layer : w.decoder) {
        layer.self_attn = attn();
        layer.cross_attn = attn();
    }
    return w;
}

}  // namespace detail

// Correctly shaped all-zero parameter set; the single authority on tensor
// shapes, used by init, checkpoint validation and the optimizer state.
inline TransformerParams zero_params(const ModelConfig& cfg) {
    cfg.validate();
    TransformerParams p = detail::make_layout<Tensor>(cfg);
    const std::size_t d = cfg.model_dim, dk = cfg.head_dim();
    p.for_each([&](const std::string& name, Tensor& t) {
        if (name == "token_embedding") {
            t = Tensor::zeros({cfg.vocab_size, d});
        } else if (name == "pos_embedding") {
            t = Tensor::zeros({cfg.max_seq_len, d});
        } else if (name == "output_projection") {
            t = Tensor::zeros({d, cfg.vocab_size});
        } else if (name.ends_with(".wq") || name.ends_with(".wk") || name.ends_with(".wv")) {
            t = Tensor::zeros({d, dk});
        } else if (name.ends_with(".merge")) {
            t = Tensor::zeros({d, d});
        } else if (name.ends_with(".w1")) {
            t = Tensor::zeros({d, cfg.ffn_dim});
        } else if (name.ends_with(".w2")) {
            t = Tensor::zeros({cfg.ffn_dim, d});
        } else if (name.ends_with(".b1")) {
            t = Tensor::zeros({cfg.ffn_dim});
        } else if (name.ends_with(".b2") || name.ends_with(".gamma") || name.ends_with(".beta")) {
            t = Tensor::zeros({d});
        } else {
            throw ComputeError("zero_params: unhandled tensor " + name);
        }
    });
    return p;
}

// Fresh parameters: Glorot-uniform matrices, gamma = 1, beta = 0, zero
// biases. Enumeration order plus one seeded stream makes init deterministic.
inline TransformerParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    TransformerParams p = zero_params(cfg);
    Rng rng(seed);
    p.for_each([&](const std::string& name, Tensor& t) {
        if (name.ends_with(".gamma")) {
            t.fill(1.0);
        } else if (t.ndim() == 2) {
            t = Tensor::glorot_uniform(t.dim(0), t.dim(1), rng);
        }
        // biases and beta stay zero
    });
    return p;
}

// Binds every parameter tensor into the graph as a tracked leaf, in
// canonical order; gradients come back out in the same order.
inline BoundParams bind_params(Graph& g, const TransformerParams& p, const ModelConfig& cfg) {
    BoundParams b = detail::make_layout<Var>(cfg);
    std::vector<const Tensor*> src;
    p.for_each([&](const std::string&, const Tensor& t) { src.push_back(&t); });
    std::vector<Var*> dst;
    b.for_each([&](const std::string&, Var& v) { dst.push_back(&v); });
    if (src.size() != dst.size()) throw ComputeError("bind_params: layout mismatch");
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = g.param(*src[i]);
    return b;
}

// Fixed sinusoidal position table: sin on even columns, cos on odd ones,
// geometric wavelength progression over column pairs.
inline Tensor sinusoidal_positions(std::size_t n, std::size_t d) {
    Tensor pe({n, d});
    for (std::size_t pos = 0; pos < n; ++pos) {
        for (std::size_t j = 0; j < d; ++j) {
            const double exponent = static_cast<double>(2 * (j / 2)) / static_cast<double>(d);
            const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
            pe(pos, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

// Per-layer, per-head attention weight matrices captured during a forward
// pass; every row sums to 1 over the positions its mask kept.
struct AttentionTrace {
    std::vector<std::vector<Tensor>> encoder_self;
    std::vector<std::vector<Tensor>> decoder_self;
    std::vector<std::vector<Tensor>> decoder_cross;
};

// Single attention head: scaled dot-product scores from projected queries
// and keys, masked row softmax, weighted combination of projected values.
// `trace_out`, when given, receives the attention weight matrix.
inline Var attention_head(Var q_in, Var kv_in, const HeadWeights<Var>& w, const Mask& mask,
                          std::size_t head_dim, Tensor* trace_out = nullptr) {
    Var q = matmul(q_in, w.wq);
    Var k = matmul(kv_in, w.wk);
    Var v = matmul(kv_in, w.wv);
    Var scores = scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(head_dim)));
    Var weights = masked_softmax_rows(scores, mask);
    if (trace_out) *trace_out = q_in.graph->value(weights);
    return matmul(weights, v);
}

// Concatenation of all head outputs followed by the merge projection.
inline Var multi_head_attention(Var q_in, Var kv_in, const AttnWeights<Var>& w, const Mask& mask,
                                std::size_t head_dim, std::vector<Tensor>* trace_heads = nullptr) {
    std::vector<Var> heads;
    heads.reserve(w.heads.size());
    if (trace_heads) trace_heads->resize(w.heads.size());
    for (std::size_t h = 0; h < w.heads.size(); ++h) {
        Tensor* slot = trace_heads ? &(*trace_heads)[h] : nullptr;
        heads.push_back(attention_head(q_in, kv_in, w.heads[h], mask, head_dim, slot));
    }
    return matmul(concat_cols(heads), w.merge);
}

// Position-wise two-layer feed-forward with ReLU.
inline Var feed_forward(Var x, const FfnWeights<Var>& w) {
    Var hidden = relu(add_row_bias(matmul(x, w.w1), w.b1));
    return add_row_bias(matmul(hidden, w.w2), w.b2);
}

namespace detail {

inline Var residual_norm(Var x, Var sublayer_out, const NormWeights<Var>& ln) {
    return layer_norm(add(x, sublayer_out), ln.gamma, ln.beta, kLayerNormEps);
}

}  // namespace detail

// Attention masks. Entries are keyed by the *key* position so padded
// positions can never contribute values; the causal variant additionally
// hides future target positions.
inline Mask key_padding_mask(std::size_t n, const std::vector<std::uint8_t>& key_real) {
    Mask mask(n, n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) mask.at(i, j) = key_real[j] ? 1 : 0;
    return mask;
}

inline Mask causal_key_padding_mask(std::size_t n, const std::vector<std::uint8_t>& key_real) {
    Mask mask(n, n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) mask.at(i, j) = key_real[j] ? 1 : 0;
    return mask;
}

inline Var encoder_block(Var x, const EncoderLayer<Var>& layer, const Mask& self_mask,
                         std::size_t head_dim, std::vector<Tensor>* trace_heads = nullptr) {
    Var attn_out = multi_head_attention(x, x, layer.attn, self_mask, head_dim, trace_heads);
    Var h = detail::residual_norm(x, attn_out, layer.ln1);
    Var ffn_out = feed_forward(h, layer.ffn);
    return detail::residual_norm(h, ffn_out, layer.ln2);
}

inline Var decoder_block(Var y, Var encoder_out, const DecoderLayer<Var>& layer, const Mask& causal_mask,
                         const Mask& cross_mask, std::size_t head_dim,
                         std::vector<Tensor>* trace_self = nullptr,
                         std::vector<Tensor>* trace_cross = nullptr) {
    Var self_out = multi_head_attention(y, y, layer.self_attn, causal_mask, head_dim, trace_self);
    Var h = detail::residual_norm(y, self_out, layer.ln1);
    Var cross_out =
        multi_head_attention(h, encoder_out, layer.cross_attn, cross_mask, head_dim, trace_cross);
    Var h2 = detail::residual_norm(h, cross_out, layer.ln2);
    Var ffn_out = feed_forward(h2, layer.ffn);
    return detail::residual_norm(h2, ffn_out, layer.ln3);
}

struct ForwardOutput {
    Var logits;       // max_seq_len x vocab_size
    Var encoder_out;  // max_seq_len x model_dim
};

// Teacher-forced forward pass. The decoder input is the [start]-prefixed
// target sequence; causal masking means the logits row at position i is the
// next-token distribution conditioned on target positions <= i, so row i
// scores the token at position i + 1.
inline ForwardOutput transformer_forward(Graph& g, const ModelConfig& cfg, const BoundParams& bp,
                                         const std::vector<int>& input_ids,
                                         const std::vector<int>& decoder_input_ids,
                                         const std::vector<std::uint8_t>& input_real,
                                         const std::vector<std::uint8_t>& target_real,
                                         AttentionTrace* trace = nullptr) {
    const std::size_t n = cfg.max_seq_len;
    if (input_ids.size() != n || decoder_input_ids.size() != n)
        throw ComputeError("transformer_forward: sequences must have length max_seq_len");
    if (input_real.size() != n || target_real.size() != n)
        throw ComputeError("transformer_forward: masks must have length max_seq_len");

    Var positions = bp.pos_embedding ? *bp.pos_embedding
                                     : g.constant(sinusoidal_positions(n, cfg.model_dim));

    if (trace) {
        trace->encoder_self.resize(cfg.num_blocks);
        trace->decoder_self.resize(cfg.num_blocks);
        trace->decoder_cross.resize(cfg.num_blocks);
    }

    const Mask enc_mask = key_padding_mask(n, input_real);
    Var x = add(embedding_lookup(bp.token_embedding, input_ids), positions);
    for (std::size_t l = 0; l < cfg.num_blocks; ++l) {
        x = encoder_block(x, bp.encoder[l], enc_mask, cfg.head_dim(),
                          trace ? &trace->encoder_self[l] : nullptr);
    }
    Var encoder_out = x;

    const Mask causal_mask = causal_key_padding_mask(n, target_real);
    const Mask cross_mask = key_padding_mask(n, input_real);
    Var y = add(embedding_lookup(bp.token_embedding, decoder_input_ids), positions);
    for (std::size_t l = 0; l < cfg.num_blocks; ++l) {
        y = decoder_block(y, encoder_out, bp.decoder[l], causal_mask, cross_mask, cfg.head_dim(),
                          trace ? &trace->decoder_self[l] : nullptr,
                          trace ? &trace->decoder_cross[l] : nullptr);
    }
    return {matmul(y, bp.output_projection), encoder_out};
}

inline std::vector<std::uint8_t> real_positions(const std::vector<int>& ids) {
    std::vector<std::uint8_t> real(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) real[i] = ids[i] != kPadId ? 1 : 0;
    return real;
}

// Owning convenience wrapper: builds a graph, runs the forward pass and
// returns the logits values. Masks are derived from the pad id.
inline Tensor forward_logits(const ModelConfig& cfg, const TransformerParams& params,
                             const std::vector<int>& input_ids, const std::vector<int>& target_ids,
                             AttentionTrace* trace = nullptr) {
    Graph g;
    BoundParams bp = bind_params(g, params, cfg);
    ForwardOutput out = transformer_forward(g, cfg, bp, input_ids, target_ids, real_positions(input_ids),
                                            real_positions(target_ids), trace);
    return g.value(out.logits);
}

inline std::size_t argmax_row(const Tensor& logits, std::size_t row) {
    std::size_t best = 0;
    double best_v = logits(row, 0);
    for (std::size_t j = 1; j < logits.cols(); ++j) {
        if (logits(row, j) > best_v) {  // ties keep the lowest id
            best_v = logits(row, j);
            best = j;
        }
    }
    return best;
}

// Greedy autoregressive decoding: starting from [start], repeatedly append
// the argmax next token (ties to the lowest id) until [end] is emitted or
// max_len tokens have been produced. The returned sequence includes [start]
// and, when produced, [end].
inline std::vector<int> greedy_decode(const ModelConfig& cfg, const TransformerParams& params,
                                      const std::vector<int>& input_ids, std::size_t max_len = 0) {
    const std::size_t n = cfg.max_seq_len;
    if (max_len == 0 || max_len > n) max_len = n;
    std::vector<int> generated = {kStartId};
    const std::vector<std::uint8_t> input_real = real_positions(input_ids);
    while (generated.size() < max_len) {
        std::vector<int> decoder_input(n, kPadId);
        std::vector<std::uint8_t> target_real(n, 0);
        for (std::size_t i = 0; i < generated.size(); ++i) {
            decoder_input[i] = generated[i];
            target_real[i] = 1;
        }
        Graph g;
        BoundParams bp = bind_params(g, params, cfg);
        ForwardOutput out =
            transformer_forward(g, cfg, bp, input_ids, decoder_input, input_real, target_real);
        const Tensor& logits = g.value(out.logits);
        const int next = static_cast<int>(argmax_row(logits, generated.size() - 1));
        generated.push_back(next);
        if (next == kEndId) break;
    }
    return generated;
}

}  // namespace okbc
