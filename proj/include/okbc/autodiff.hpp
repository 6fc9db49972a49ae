#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "okbc/tensor.hpp"

namespace okbc {

class Graph;

// Lightweight handle to a node inside one Graph. Valid only as long as the
// graph it came from.
struct Var {
    Graph* graph = nullptr;
    std::size_t id = 0;
};

// Reverse-mode autodiff over a tape. Nodes are appended in construction
// order, which is a topological order by definition, so the backward pass is
// a single reverse sweep that touches each node exactly once.
class Graph {
public:
    Var constant(Tensor value) { return push(std::move(value), {}); }

    // Tracked leaf: a copy of a trainable tensor. Registration order is the
    // canonical parameter order used by the gradient checker and optimizer.
    Var param(const Tensor& value) {
        Var v = push(value, {});
        param_ids_.push_back(v.id);
        return v;
    }

    Var push(Tensor value, std::function<void(Graph&)> backward_fn) {
        nodes_.push_back(Node{std::move(value), Tensor(), std::move(backward_fn)});
        return Var{this, nodes_.size() - 1};
    }

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    Tensor& value_mut(Var v) { return nodes_[v.id].value; }
    const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
    Tensor& grad_mut(std::size_t id) { return nodes_[id].grad; }

    const std::vector<std::size_t>& param_ids() const { return param_ids_; }

    Tensor param_grad(std::size_t index) const { return nodes_[param_ids_[index]].grad; }

    // Reverse sweep from `root` (a scalar). `seed` is the incoming gradient,
    // normally 1; training uses it to weight per-example losses inside a
    // pooled batch objective.
    void backward(Var root, double seed = 1.0) {
        if (!value(root).is_scalar()) throw ComputeError("backward: root must be a scalar");
        for (std::size_t i = 0; i <= root.id; ++i) {
            nodes_[i].grad = Tensor::zeros(nodes_[i].value.shape());
        }
        nodes_[root.id].grad[0] = seed;
        for (std::size_t i = root.id + 1; i-- > 0;) {
            if (nodes_[i].backward_fn) nodes_[i].backward_fn(*this);
        }
    }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Graph&)> backward_fn;  // empty for leaves
    };
    // deque: references returned by value()/grad() stay valid as the tape grows
    std::deque<Node> nodes_;
    std::vector<std::size_t> param_ids_;
};

namespace detail {
inline Graph& same_graph(Var a, Var b) {
    if (a.graph != b.graph) throw ComputeError("operands belong to different graphs");
    return *a.graph;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and shape ops
// ---------------------------------------------------------------------------

inline Var add(Var a, Var b) {
    Graph& g = detail::same_graph(a, b);
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(b);
    if (!ta.same_shape(tb))
        throw ComputeError("add: shape mismatch " + shape_str(ta) + " vs " + shape_str(tb));
    Tensor out = ta;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += tb[i];
    return g.push(std::move(out), [a, b, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        Tensor& da = gg.grad_mut(a.id);
        Tensor& db = gg.grad_mut(b.id);
        for (std::size_t i = 0; i < dc.numel(); ++i) {
            da[i] += dc[i];
            db[i] += dc[i];
        }
    });
}

// A[p x q] + row-broadcast bias[q].
inline Var add_row_bias(Var a, Var bias) {
    Graph& g = detail::same_graph(a, bias);
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(bias);
    if (ta.ndim() != 2 || tb.ndim() != 1 || tb.dim(0) != ta.dim(1))
        throw ComputeError("add_row_bias: shape mismatch " + shape_str(ta) + " vs " + shape_str(tb));
    Tensor out = ta;
    const std::size_t p = ta.dim(0), q = ta.dim(1);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < q; ++j) out(i, j) += tb[j];
    return g.push(std::move(out), [a, bias, cid = g.size(), p, q](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        Tensor& da = gg.grad_mut(a.id);
        Tensor& db = gg.grad_mut(bias.id);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < q; ++j) {
                da(i, j) += dc(i, j);
                db[j] += dc(i, j);
            }
    });
}

inline Var mul(Var a, Var b) {
    Graph& g = detail::same_graph(a, b);
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(b);
    if (!ta.same_shape(tb)) throw ComputeError("mul: shape mismatch");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= tb[i];
    return g.push(std::move(out), [a, b, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        const Tensor& va = gg.value(a);
        const Tensor& vb = gg.value(b);
        Tensor& da = gg.grad_mut(a.id);
        Tensor& db = gg.grad_mut(b.id);
        for (std::size_t i = 0; i < dc.numel(); ++i) {
            da[i] += dc[i] * vb[i];
            db[i] += dc[i] * va[i];
        }
    });
}

inline Var scale(Var a, double factor) {
    Graph& g = *a.graph;
    Tensor out = g.value(a);
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= factor;
    return g.push(std::move(out), [a, factor, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        Tensor& da = gg.grad_mut(a.id);
        for (std::size_t i = 0; i < dc.numel(); ++i) da[i] += factor * dc[i];
    });
}

inline Var relu(Var a) {
    Graph& g = *a.graph;
    Tensor out = g.value(a);
    for (std::size_t i = 0; i < out.numel(); ++i)
        if (out[i] < 0.0) out[i] = 0.0;
    return g.push(std::move(out), [a, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        const Tensor& va = gg.value(a);
        Tensor& da = gg.grad_mut(a.id);
        for (std::size_t i = 0; i < dc.numel(); ++i)
            if (va[i] > 0.0) da[i] += dc[i];
    });
}

inline Var sum(Var a) {
    Graph& g = *a.graph;
    const Tensor& ta = g.value(a);
    double s = 0.0;
    for (std::size_t i = 0; i < ta.numel(); ++i) s += ta[i];
    return g.push(Tensor::scalar(s), [a, cid = g.size()](Graph& gg) {
        const double dc = gg.grad_mut(cid)[0];
        Tensor& da = gg.grad_mut(a.id);
        for (std::size_t i = 0; i < da.numel(); ++i) da[i] += dc;
    });
}

// Column-wise concatenation of matrices with a common row count.
inline Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ComputeError("concat_cols: no inputs");
    Graph& g = *parts.front().graph;
    const std::size_t rows = g.value(parts.front()).dim(0);
    std::size_t total_cols = 0;
    for (Var p : parts) {
        const Tensor& t = g.value(p);
        if (t.ndim() != 2 || t.dim(0) != rows) throw ComputeError("concat_cols: shape mismatch");
        total_cols += t.dim(1);
    }
    Tensor out({rows, total_cols});
    std::size_t col0 = 0;
    for (Var p : parts) {
        const Tensor& t = g.value(p);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < t.dim(1); ++j) out(i, col0 + j) = t(i, j);
        col0 += t.dim(1);
    }
    std::vector<std::size_t> part_ids;
    std::vector<std::size_t> part_cols;
    for (Var p : parts) {
        part_ids.push_back(p.id);
        part_cols.push_back(g.value(p).dim(1));
    }
    return g.push(std::move(out),
                  [part_ids, part_cols, rows, cid = g.size()](Graph& gg) {
                      const Tensor& dc = gg.grad_mut(cid);
                      std::size_t col0 = 0;
                      for (std::size_t k = 0; k < part_ids.size(); ++k) {
                          Tensor& dp = gg.grad_mut(part_ids[k]);
                          for (std::size_t i = 0; i < rows; ++i)
                              for (std::size_t j = 0; j < part_cols[k]; ++j)
                                  dp(i, j) += dc(i, col0 + j);
                          col0 += part_cols[k];
                      }
                  });
}

// ---------------------------------------------------------------------------
// Matrix products
// ---------------------------------------------------------------------------

namespace detail {
// C += A * B, row-major ikj loop order.
inline void mm_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const std::size_t p = a.dim(0), q = a.dim(1), r = b.dim(1);
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < q; ++k) {
            const double aik = pa[i * q + k];
            if (aik == 0.0) continue;
            const double* brow = pb + k * r;
            double* crow = pc + i * r;
            for (std::size_t j = 0; j < r; ++j) crow[j] += aik * brow[j];
        }
    }
}
}  // namespace detail

inline Var matmul(Var a, Var b) {
    Graph& g = detail::same_graph(a, b);
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(b);
    if (ta.ndim() != 2 || tb.ndim() != 2 || ta.dim(1) != tb.dim(0))
        throw ComputeError("matmul: shape mismatch " + shape_str(ta) + " x " + shape_str(tb));
    const std::size_t p = ta.dim(0), q = ta.dim(1), r = tb.dim(1);
    Tensor out({p, r});
    detail::mm_acc(ta, tb, out);
    return g.push(std::move(out), [a, b, p, q, r, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        const Tensor& va = gg.value(a);
        const Tensor& vb = gg.value(b);
        Tensor& da = gg.grad_mut(a.id);
        Tensor& db = gg.grad_mut(b.id);
        // dA = dC * B^T
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t k = 0; k < q; ++k) {
                double acc = 0.0;
                for (std::size_t j = 0; j < r; ++j) acc += dc(i, j) * vb(k, j);
                da(i, k) += acc;
            }
        // dB = A^T * dC
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t k = 0; k < q; ++k) {
                const double aik = va(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < r; ++j) db(k, j) += aik * dc(i, j);
            }
    });
}

// C = A * B^T; used for attention scores where both operands are row-major
// per-position projections.
inline Var matmul_nt(Var a, Var b) {
    Graph& g = detail::same_graph(a, b);
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(b);
    if (ta.ndim() != 2 || tb.ndim() != 2 || ta.dim(1) != tb.dim(1))
        throw ComputeError("matmul_nt: shape mismatch " + shape_str(ta) + " x " + shape_str(tb));
    const std::size_t p = ta.dim(0), q = ta.dim(1), r = tb.dim(0);
    Tensor out({p, r});
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < q; ++k) acc += ta(i, k) * tb(j, k);
            out(i, j) = acc;
        }
    return g.push(std::move(out), [a, b, p, q, r, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        const Tensor& va = gg.value(a);
        const Tensor& vb = gg.value(b);
        Tensor& da = gg.grad_mut(a.id);
        Tensor& db = gg.grad_mut(b.id);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < r; ++j) {
                const double d = dc(i, j);
                if (d == 0.0) continue;
                for (std::size_t k = 0; k < q; ++k) {
                    da(i, k) += d * vb(j, k);
                    db(j, k) += d * va(i, k);
                }
            }
    });
}

// ---------------------------------------------------------------------------
// Softmax, layer norm, embeddings, loss
// ---------------------------------------------------------------------------

inline Var softmax_rows(Var z) {
    Graph& g = *z.graph;
    const Tensor& tz = g.value(z);
    const std::size_t p = tz.rows(), q = tz.cols();
    Tensor out(tz.shape());
    for (std::size_t i = 0; i < p; ++i) {
        double mx = tz(i, 0);
        for (std::size_t j = 1; j < q; ++j) mx = std::max(mx, tz(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            const double e = std::exp(tz(i, j) - mx);
            out(i, j) = e;
            s += e;
        }
        for (std::size_t j = 0; j < q; ++j) out(i, j) /= s;
    }
    return g.push(std::move(out), [z, p, q, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        const Tensor& y = gg.value(Var{&gg, cid});
        Tensor& dz = gg.grad_mut(z.id);
        for (std::size_t i = 0; i < p; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < q; ++j) dot += dc(i, j) * y(i, j);
            for (std::size_t j = 0; j < q; ++j) dz(i, j) += y(i, j) * (dc(i, j) - dot);
        }
    });
}

// Row softmax over kept entries only; dropped entries get weight exactly 0 so
// they can never leak values (or gradients) across the mask. A fully masked
// row yields an all-zero row.
inline Var masked_softmax_rows(Var z, const Mask& mask) {
    Graph& g = *z.graph;
    const Tensor& tz = g.value(z);
    const std::size_t p = tz.rows(), q = tz.cols();
    if (mask.rows != p || mask.cols != q) throw ComputeError("masked_softmax_rows: mask shape mismatch");
    Tensor out(tz.shape());
    for (std::size_t i = 0; i < p; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < q; ++j)
            if (mask.at(i, j)) mx = std::max(mx, tz(i, j));
        if (!std::isfinite(mx)) continue;  // fully masked row stays zero
        double s = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            if (!mask.at(i, j)) continue;
            const double e = std::exp(tz(i, j) - mx);
            out(i, j) = e;
            s += e;
        }
        for (std::size_t j = 0; j < q; ++j)
            if (mask.at(i, j)) out(i, j) /= s;
    }
    return g.push(std::move(out), [z, mask, p, q, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        const Tensor& y = gg.value(Var{&gg, cid});
        Tensor& dz = gg.grad_mut(z.id);
        for (std::size_t i = 0; i < p; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < q; ++j)
                if (mask.at(i, j)) dot += dc(i, j) * y(i, j);
            for (std::size_t j = 0; j < q; ++j)
                if (mask.at(i, j)) dz(i, j) += y(i, j) * (dc(i, j) - dot);
        }
    });
}

// Row-wise normalization: gamma * (z - mean) / sqrt(var + eps) + beta, with
// mean and variance taken over each row.
inline Var layer_norm(Var z, Var gamma, Var beta, double eps) {
    Graph& g = *z.graph;
    if (eps <= 0.0) throw ComputeError("layer_norm: eps must be positive");
    const Tensor& tz = g.value(z);
    const Tensor& tg = g.value(gamma);
    const Tensor& tb = g.value(beta);
    const std::size_t p = tz.rows(), dcols = tz.cols();
    if (tg.numel() != dcols || tb.numel() != dcols) throw ComputeError("layer_norm: gamma/beta shape mismatch");
    Tensor out(tz.shape());
    std::vector<double> inv_sigma(p);
    Tensor xhat(tz.shape());
    for (std::size_t i = 0; i < p; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < dcols; ++j) mu += tz(i, j);
        mu /= static_cast<double>(dcols);
        double var = 0.0;
        for (std::size_t j = 0; j < dcols; ++j) {
            const double c = tz(i, j) - mu;
            var += c * c;
        }
        var /= static_cast<double>(dcols);
        const double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[i] = is;
        for (std::size_t j = 0; j < dcols; ++j) {
            xhat(i, j) = (tz(i, j) - mu) * is;
            out(i, j) = tg[j] * xhat(i, j) + tb[j];
        }
    }
    return g.push(std::move(out),
                  [z, gamma, beta, xhat = std::move(xhat), inv_sigma = std::move(inv_sigma), p, dcols,
                   cid = g.size()](Graph& gg) {
                      const Tensor& dc = gg.grad_mut(cid);
                      const Tensor& tg = gg.value(gamma);
                      Tensor& dz = gg.grad_mut(z.id);
                      Tensor& dgamma = gg.grad_mut(gamma.id);
                      Tensor& dbeta = gg.grad_mut(beta.id);
                      const double inv_d = 1.0 / static_cast<double>(dcols);
                      for (std::size_t i = 0; i < p; ++i) {
                          double mean_g = 0.0, mean_gx = 0.0;
                          for (std::size_t j = 0; j < dcols; ++j) {
                              const double gj = dc(i, j) * tg[j];
                              mean_g += gj;
                              mean_gx += gj * xhat(i, j);
                          }
                          mean_g *= inv_d;
                          mean_gx *= inv_d;
                          for (std::size_t j = 0; j < dcols; ++j) {
                              const double gj = dc(i, j) * tg[j];
                              dz(i, j) += (gj - mean_g - xhat(i, j) * mean_gx) * inv_sigma[i];
                              dgamma[j] += dc(i, j) * xhat(i, j);
                              dbeta[j] += dc(i, j);
                          }
                      }
                  });
}

// Row gather; backward scatter-adds, so repeated ids accumulate.
inline Var embedding_lookup(Var table, const std::vector<int>& ids) {
    Graph& g = *table.graph;
    const Tensor& tt = g.value(table);
    const std::size_t vocab = tt.dim(0), width = tt.dim(1);
    for (int id : ids)
        if (id < 0 || static_cast<std::size_t>(id) >= vocab)
            throw ComputeError("embedding_lookup: id " + std::to_string(id) + " out of range");
    Tensor out({ids.size(), width});
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) out(i, j) = tt(static_cast<std::size_t>(ids[i]), j);
    return g.push(std::move(out), [table, ids, width, cid = g.size()](Graph& gg) {
        const Tensor& dc = gg.grad_mut(cid);
        Tensor& dt = gg.grad_mut(table.id);
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = 0; j < width; ++j) dt(static_cast<std::size_t>(ids[i]), j) += dc(i, j);
    });
}

// Mean over unmasked positions of -log2 p(target), with p from a stabilized
// row softmax of the logits.
inline Var cross_entropy_bits(Var logits, const std::vector<int>& targets,
                              const std::vector<std::uint8_t>& position_mask) {
    Graph& g = *logits.graph;
    const Tensor& tl = g.value(logits);
    const std::size_t p = tl.rows(), vocab = tl.cols();
    if (targets.size() != p || position_mask.size() != p)
        throw ComputeError("cross_entropy_bits: target/mask length mismatch");
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < p; ++i) {
        if (!position_mask[i]) continue;
        ++cnt;
        if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= vocab)
            throw ComputeError("cross_entropy_bits: target id out of range");
    }
    if (cnt == 0) throw ComputeError("cross_entropy_bits: all positions masked");
    Tensor probs({p, vocab});
    double loss_bits = 0.0;
    const double ln2 = std::log(2.0);
    for (std::size_t i = 0; i < p; ++i) {
        if (!position_mask[i]) continue;
        double mx = tl(i, 0);
        for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, tl(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) {
            const double e = std::exp(tl(i, j) - mx);
            probs(i, j) = e;
            s += e;
        }
        for (std::size_t j = 0; j < vocab; ++j) probs(i, j) /= s;
        const double log_p = (tl(i, static_cast<std::size_t>(targets[i])) - mx) - std::log(s);
        loss_bits -= log_p / ln2;
    }
    loss_bits /= static_cast<double>(cnt);
    return g.push(Tensor::scalar(loss_bits),
                  [logits, targets, position_mask, probs = std::move(probs), p, vocab, cnt, ln2,
                   cid = g.size()](Graph& gg) {
                      const double droot = gg.grad_mut(cid)[0];
                      Tensor& dl = gg.grad_mut(logits.id);
                      const double w = droot / (static_cast<double>(cnt) * ln2);
                      for (std::size_t i = 0; i < p; ++i) {
                          if (!position_mask[i]) continue;
                          for (std::size_t j = 0; j < vocab; ++j) {
                              double d = probs(i, j);
                              if (j == static_cast<std::size_t>(targets[i])) d -= 1.0;
                              dl(i, j) += w * d;
                          }
                      }
                  });
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checker
// ---------------------------------------------------------------------------

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t coords_checked = 0;
};

// Central-difference check of analytic gradients on a sampled coordinate
// subset (at most max_coords per tensor, to bound runtime). `build` must
// register one graph param per entry of `params`, in order, and return the
// scalar output node.
template <typename BuildFn>
GradCheckReport check_gradients(BuildFn&& build, const std::vector<Tensor*>& params, double eps,
                                std::uint64_t seed, std::size_t max_coords = 64) {
    if (eps < 1e-6 || eps > 1e-2) throw ComputeError("check_gradients: eps out of [1e-6, 1e-2]");

    std::vector<Tensor> analytic;
    {
        Graph g;
        Var loss = build(g);
        if (!g.value(loss).all_finite()) throw ComputeError("check_gradients: non-finite loss");
        if (g.param_ids().size() != params.size())
            throw ComputeError("check_gradients: build registered a different param count");
        g.backward(loss);
        for (std::size_t k = 0; k < params.size(); ++k) {
            if (!g.value(Var{&g, g.param_ids()[k]}).same_shape(*params[k]))
                throw ComputeError("check_gradients: param shape mismatch at index " + std::to_string(k));
            analytic.push_back(g.param_grad(k));
            if (!analytic.back().all_finite())
                throw ComputeError("check_gradients: non-finite analytic gradient");
        }
    }

    auto eval = [&]() {
        Graph g;
        Var loss = build(g);
        const double v = g.value(loss).item();
        if (!std::isfinite(v)) throw ComputeError("check_gradients: non-finite loss during probing");
        return v;
    };

    Rng rng(seed);
    GradCheckReport report;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& t = *params[k];
        std::vector<std::size_t> coords(t.numel());
        for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
        if (coords.size() > max_coords) {
            rng.shuffle(coords);
            coords.resize(max_coords);
        }
        for (std::size_t c : coords) {
            const double saved = t[c];
            t[c] = saved + eps;
            const double f_plus = eval();
            t[c] = saved - eps;
            const double f_minus = eval();
            t[c] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double a = analytic[k][c];
            const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            report.max_rel_error = std::max(report.max_rel_error, rel);
            ++report.coords_checked;
        }
    }
    return report;
}

}  // namespace okbc
