// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fsdet/tensor.hpp"

namespace fsdet {

/// Trainable tensor with a persistently accumulated gradient.
template <class T>
struct ParamT {
    std::string name;
    TensorT<T> value;
    TensorT<T> grad;

    ParamT(std::string n, TensorT<T> v)
        : name(std::move(n)), value(std::move(v)), grad(TensorT<T>::zeros(value.shape)) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), T(0)); }
};

template <class T>
struct ParamSetT {
    std::vector<std::shared_ptr<ParamT<T>>> items;

    std::shared_ptr<ParamT<T>> add(std::string name, TensorT<T> value) {
        for (const auto& p : items)
            if (p->name == name)
                throw std::invalid_argument("duplicate parameter name '" + name + "'");
        items.push_back(std::make_shared<ParamT<T>>(std::move(name), std::move(value)));
        return items.back();
    }

    std::shared_ptr<ParamT<T>> find(const std::string& name) const {
        for (const auto& p : items)
            if (p->name == name) return p;
        return nullptr;
    }

    void zero_grads() {
        for (auto& p : items) p->zero_grad();
    }

    /// value <- value - lr * grad, then gradients are zeroed.
    void sgd_step(T lr) {
        for (auto& p : items) {
            for (std::size_t i = 0; i < p->value.data.size(); ++i)
                p->value.data[i] -= lr * p->grad.data[i];
            p->zero_grad();
        }
    }

    std::size_t total_values() const {
        std::size_t n = 0;
        for (const auto& p : items) n += p->value.numel();
        return n;
    }
};

template <class T>
struct NodeT {
    TensorT<T> value;
    TensorT<T> grad;                    // zero-initialized, same shape
    std::vector<std::shared_ptr<NodeT<T>>> parents;
    std::function<void()> back;         // propagates this->grad into parents

    explicit NodeT(TensorT<T> v) : value(std::move(v)), grad(TensorT<T>::zeros(value.shape)) {}
};

template <class T>
using VarT = std::shared_ptr<NodeT<T>>;

/// Records operations in creation order (already topological); backward is
/// one reverse sweep. Single-threaded by construction; independent tapes
/// may live on separate threads.
template <class T>
class TapeT {
public:
    VarT<T> make(TensorT<T> value, std::vector<VarT<T>> parents = {}) {
        auto node = std::make_shared<NodeT<T>>(std::move(value));
        node->parents = std::move(parents);
        nodes_.push_back(node);
        return node;
    }

    VarT<T> constant(TensorT<T> value) { return make(std::move(value)); }

    /// Leaf whose backward pass accumulates into the parameter's gradient.
    /// The parameter must outlive the tape.
    VarT<T> leaf(ParamT<T>& p) {
        VarT<T> v = make(p.value);
        NodeT<T>* self = v.get();
        ParamT<T>* pp = &p;
        v->back = [self, pp] {
            for (std::size_t i = 0; i < self->grad.data.size(); ++i)
                pp->grad.data[i] += self->grad.data[i];
        };
        return v;
    }

    /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse, populating
    /// parameter gradients additively. Throws on a non-scalar loss.
    void backward(const VarT<T>& loss) {
        if (loss->value.numel() != 1)
            throw std::invalid_argument("backward: loss must be a scalar, got " +
                                        loss->value.shape_string());
        loss->grad.data[0] = T(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
            if ((*it)->back) (*it)->back();
    }

    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<VarT<T>> nodes_;
};

using Param = ParamT<float>;
using ParamSet = ParamSetT<float>;
using Var = VarT<float>;
using Tape = TapeT<float>;

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------
namespace nn {

template <class T>
VarT<T> add(TapeT<T>& tape, const VarT<T>& a, const VarT<T>& b) {
    require_same_shape(a->value, b->value, "add");
    TensorT<T> v = a->value;
    for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] += b->value.data[i];
    VarT<T> out = tape.make(std::move(v), {a, b});
    NodeT<T>*o = out.get(), *pa = a.get(), *pb = b.get();
    out->back = [o, pa, pb] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i) {
            pa->grad.data[i] += o->grad.data[i];
            pb->grad.data[i] += o->grad.data[i];
        }
    };
    return out;
}

template <class T>
VarT<T> sub(TapeT<T>& tape, const VarT<T>& a, const VarT<T>& b) {
    require_same_shape(a->value, b->value, "sub");
    TensorT<T> v = a->value;
    for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] -= b->value.data[i];
    VarT<T> out = tape.make(std::move(v), {a, b});
    NodeT<T>*o = out.get(), *pa = a.get(), *pb = b.get();
    out->back = [o, pa, pb] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i) {
            pa->grad.data[i] += o->grad.data[i];
            pb->grad.data[i] -= o->grad.data[i];
        }
    };
    return out;
}

template <class T>
VarT<T> mul(TapeT<T>& tape, const VarT<T>& a, const VarT<T>& b) {
    require_same_shape(a->value, b->value, "mul");
    TensorT<T> v = a->value;
    for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] *= b->value.data[i];
    VarT<T> out = tape.make(std::move(v), {a, b});
    NodeT<T>*o = out.get(), *pa = a.get(), *pb = b.get();
    out->back = [o, pa, pb] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i) {
            pa->grad.data[i] += o->grad.data[i] * pb->value.data[i];
            pb->grad.data[i] += o->grad.data[i] * pa->value.data[i];
        }
    };
    return out;
}

template <class T>
VarT<T> scale(TapeT<T>& tape, const VarT<T>& a, T c) {
    TensorT<T> v = a->value;
    for (auto& x : v.data) x *= c;
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa, c] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i)
            pa->grad.data[i] += c * o->grad.data[i];
    };
    return out;
}

template <class T>
VarT<T> sum(TapeT<T>& tape, const VarT<T>& a) {
    T total = T(0);
    for (T x : a->value.data) total += x;
    VarT<T> out = tape.make(TensorT<T>::scalar(total), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa] {
        const T g = o->grad.data[0];
        for (auto& x : pa->grad.data) x += g;
    };
    return out;
}

template <class T>
VarT<T> exp_(TapeT<T>& tape, const VarT<T>& a) {
    TensorT<T> v = a->value;
    for (auto& x : v.data) x = std::exp(x);
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i)
            pa->grad.data[i] += o->grad.data[i] * o->value.data[i];
    };
    return out;
}

template <class T>
VarT<T> tanh_(TapeT<T>& tape, const VarT<T>& a) {
    TensorT<T> v = a->value;
    for (auto& x : v.data) x = std::tanh(x);
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i)
            pa->grad.data[i] += o->grad.data[i] * (T(1) - o->value.data[i] * o->value.data[i]);
    };
    return out;
}

template <class T>
VarT<T> log_(TapeT<T>& tape, const VarT<T>& a) {
    TensorT<T> v = a->value;
    for (auto& x : v.data) x = std::log(x);
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i)
            pa->grad.data[i] += o->grad.data[i] / pa->value.data[i];
    };
    return out;
}

template <class T>
VarT<T> sigmoid(TapeT<T>& tape, const VarT<T>& a) {
    TensorT<T> v = a->value;
    for (auto& x : v.data) {
        if (x >= T(0)) {
            x = T(1) / (T(1) + std::exp(-x));
        } else {
            const T e = std::exp(x);
            x = e / (T(1) + e);
        }
    }
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i) {
            const T s = o->value.data[i];
            pa->grad.data[i] += o->grad.data[i] * s * (T(1) - s);
        }
    };
    return out;
}

template <class T>
VarT<T> leaky_relu(TapeT<T>& tape, const VarT<T>& a, T slope = T(0.1)) {
    TensorT<T> v = a->value;
    for (auto& x : v.data)
        if (x <= T(0)) x *= slope;
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa, slope] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i) {
            const T factor = pa->value.data[i] > T(0) ? T(1) : slope;
            pa->grad.data[i] += o->grad.data[i] * factor;
        }
    };
    return out;
}

/// Softmax along one axis; numerically stabilized by max subtraction.
template <class T>
VarT<T> softmax(TapeT<T>& tape, const VarT<T>& a, int axis) {
    const auto& shape = a->value.shape;
    if (axis < 0 || axis >= a->value.rank())
        throw std::invalid_argument("softmax: bad axis for shape " + a->value.shape_string());
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= shape[i];
    for (int i = axis + 1; i < a->value.rank(); ++i) inner *= shape[i];
    const std::size_t n = shape[axis];

    TensorT<T> v = a->value;
    for (std::size_t ou = 0; ou < outer; ++ou) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = ou * n * inner + in;
            T mx = v.data[base];
            for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, v.data[base + i * inner]);
            T total = T(0);
            for (std::size_t i = 0; i < n; ++i) {
                T& x = v.data[base + i * inner];
                x = std::exp(x - mx);
                total += x;
            }
            for (std::size_t i = 0; i < n; ++i) v.data[base + i * inner] /= total;
        }
    }
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa, outer, inner, n] {
        for (std::size_t ou = 0; ou < outer; ++ou) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t base = ou * n * inner + in;
                T dot = T(0);
                for (std::size_t i = 0; i < n; ++i)
                    dot += o->grad.data[base + i * inner] * o->value.data[base + i * inner];
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t idx = base + i * inner;
                    pa->grad.data[idx] += o->value.data[idx] * (o->grad.data[idx] - dot);
                }
            }
        }
    };
    return out;
}

/// log(softmax(a, axis)) computed stably: x - max - log(sum exp(x - max)).
/// Backward: dx = dy - softmax(x) * sum(dy) along the axis.
template <class T>
VarT<T> log_softmax(TapeT<T>& tape, const VarT<T>& a, int axis) {
    const auto& shape = a->value.shape;
    if (axis < 0 || axis >= a->value.rank())
        throw std::invalid_argument("log_softmax: bad axis for shape " + a->value.shape_string());
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= shape[i];
    for (int i = axis + 1; i < a->value.rank(); ++i) inner *= shape[i];
    const std::size_t n = shape[axis];

    TensorT<T> v = a->value;
    for (std::size_t ou = 0; ou < outer; ++ou) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = ou * n * inner + in;
            T mx = v.data[base];
            for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, v.data[base + i * inner]);
            T total = T(0);
            for (std::size_t i = 0; i < n; ++i)
                total += std::exp(v.data[base + i * inner] - mx);
            const T lse = mx + std::log(total);
            for (std::size_t i = 0; i < n; ++i) v.data[base + i * inner] -= lse;
        }
    }
    VarT<T> out = tape.make(std::move(v), {a});
    NodeT<T>*o = out.get(), *pa = a.get();
    out->back = [o, pa, outer, inner, n] {
        for (std::size_t ou = 0; ou < outer; ++ou) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t base = ou * n * inner + in;
                T gsum = T(0);
                for (std::size_t i = 0; i < n; ++i) gsum += o->grad.data[base + i * inner];
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t idx = base + i * inner;
                    pa->grad.data[idx] +=
                        o->grad.data[idx] - std::exp(o->value.data[idx]) * gsum;
                }
            }
        }
    };
    return out;
}

/// Channel-wise multiplication of a CHW map by a length-C vector.
template <class T>
VarT<T> channel_scale(TapeT<T>& tape, const VarT<T>& x, const VarT<T>& w) {
    if (x->value.rank() != 3)
        throw std::invalid_argument("channel_scale: expected CHW input, got " +
                                    x->value.shape_string());
    if (w->value.rank() != 1 || w->value.shape[0] != x->value.shape[0])
        throw std::invalid_argument("channel_scale: weight length " + w->value.shape_string() +
                                    " does not match channels of " + x->value.shape_string());
    const int C = x->value.shape[0];
    const std::size_t plane = static_cast<std::size_t>(x->value.shape[1]) * x->value.shape[2];
    TensorT<T> v = x->value;
    for (int c = 0; c < C; ++c) {
        const T wc = w->value.data[c];
        for (std::size_t i = 0; i < plane; ++i) v.data[c * plane + i] *= wc;
    }
    VarT<T> out = tape.make(std::move(v), {x, w});
    NodeT<T>*o = out.get(), *px = x.get(), *pw = w.get();
    out->back = [o, px, pw, C, plane] {
        for (int c = 0; c < C; ++c) {
            const T wc = pw->value.data[c];
            T acc = T(0);
            for (std::size_t i = 0; i < plane; ++i) {
                const std::size_t idx = c * plane + i;
                px->grad.data[idx] += o->grad.data[idx] * wc;
                acc += o->grad.data[idx] * px->value.data[idx];
            }
            pw->grad.data[c] += acc;
        }
    };
    return out;
}

/// 2-d convolution: x (Ci,H,W), kernel (Co,Ci,kh,kw), optional bias (Co).
template <class T>
VarT<T> conv2d(TapeT<T>& tape, const VarT<T>& x, const VarT<T>& k, const VarT<T>& bias,
               int stride = 1, int pad = 0) {
    if (x->value.rank() != 3 || k->value.rank() != 4)
        throw std::invalid_argument("conv2d: want x CHW and kernel OIHW, got " +
                                    x->value.shape_string() + " and " + k->value.shape_string());
    const int Ci = x->value.shape[0], H = x->value.shape[1], W = x->value.shape[2];
    const int Co = k->value.shape[0], kh = k->value.shape[2], kw = k->value.shape[3];
    if (k->value.shape[1] != Ci)
        throw std::invalid_argument("conv2d: kernel input channels " + k->value.shape_string() +
                                    " do not match input " + x->value.shape_string());
    if (bias && (bias->value.rank() != 1 || bias->value.shape[0] != Co))
        throw std::invalid_argument("conv2d: bias shape " + bias->value.shape_string() +
                                    " does not match output channels");
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    const int Ho = (H + 2 * pad - kh) / stride + 1;
    const int Wo = (W + 2 * pad - kw) / stride + 1;
    if (Ho < 1 || Wo < 1)
        throw std::invalid_argument("conv2d: kernel larger than padded input");

    TensorT<T> v = TensorT<T>::zeros({Co, Ho, Wo});
    const T* xd = x->value.data.data();
    const T* kd = k->value.data.data();
    for (int co = 0; co < Co; ++co) {
        const T b = bias ? bias->value.data[co] : T(0);
        for (int yo = 0; yo < Ho; ++yo) {
            for (int xo = 0; xo < Wo; ++xo) {
                T acc = b;
                for (int ci = 0; ci < Ci; ++ci) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int yi = yo * stride - pad + ky;
                        if (yi < 0 || yi >= H) continue;
                        const T* xrow = xd + (static_cast<std::size_t>(ci) * H + yi) * W;
                        const T* krow =
                            kd + ((static_cast<std::size_t>(co) * Ci + ci) * kh + ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int xi = xo * stride - pad + kx;
                            if (xi < 0 || xi >= W) continue;
                            acc += xrow[xi] * krow[kx];
                        }
                    }
                }
                v.data[(static_cast<std::size_t>(co) * Ho + yo) * Wo + xo] = acc;
            }
        }
    }

    std::vector<VarT<T>> parents{x, k};
    if (bias) parents.push_back(bias);
    VarT<T> out = tape.make(std::move(v), std::move(parents));
    NodeT<T>*o = out.get(), *px = x.get(), *pk = k.get();
    NodeT<T>* pb = bias ? bias.get() : nullptr;
    out->back = [o, px, pk, pb, Ci, H, W, Co, kh, kw, Ho, Wo, stride, pad] {
        const T* gd = o->grad.data.data();
        const T* xd2 = px->value.data.data();
        const T* kd2 = pk->value.data.data();
        for (int co = 0; co < Co; ++co) {
            for (int yo = 0; yo < Ho; ++yo) {
                for (int xo = 0; xo < Wo; ++xo) {
                    const T g = gd[(static_cast<std::size_t>(co) * Ho + yo) * Wo + xo];
                    if (g == T(0)) continue;
                    if (pb) pb->grad.data[co] += g;
                    for (int ci = 0; ci < Ci; ++ci) {
                        for (int ky = 0; ky < kh; ++ky) {
                            const int yi = yo * stride - pad + ky;
                            if (yi < 0 || yi >= H) continue;
                            T* dxrow = px->grad.data.data() +
                                       (static_cast<std::size_t>(ci) * H + yi) * W;
                            const T* xrow = xd2 + (static_cast<std::size_t>(ci) * H + yi) * W;
                            T* dkrow = pk->grad.data.data() +
                                       ((static_cast<std::size_t>(co) * Ci + ci) * kh + ky) * kw;
                            const T* krow =
                                kd2 + ((static_cast<std::size_t>(co) * Ci + ci) * kh + ky) * kw;
                            for (int kx = 0; kx < kw; ++kx) {
                                const int xi = xo * stride - pad + kx;
                                if (xi < 0 || xi >= W) continue;
                                dxrow[xi] += g * krow[kx];
                                dkrow[kx] += g * xrow[xi];
                            }
                        }
                    }
                }
            }
        }
    };
    return out;
}

/// 2x2 max pooling with stride 2; ties give the gradient to the first
/// element in scan order. Input extent must be even.
template <class T>
VarT<T> max_pool2x2(TapeT<T>& tape, const VarT<T>& x) {
    if (x->value.rank() != 3)
        throw std::invalid_argument("max_pool2x2: expected CHW, got " + x->value.shape_string());
    const int C = x->value.shape[0], H = x->value.shape[1], W = x->value.shape[2];
    if (H % 2 || W % 2)
        throw std::invalid_argument("max_pool2x2: extent must be even, got " +
                                    x->value.shape_string());
    const int Ho = H / 2, Wo = W / 2;
    TensorT<T> v = TensorT<T>::zeros({C, Ho, Wo});
    auto argmax = std::make_shared<std::vector<std::size_t>>(v.numel());
    for (int c = 0; c < C; ++c) {
        for (int yo = 0; yo < Ho; ++yo) {
            for (int xo = 0; xo < Wo; ++xo) {
                std::size_t best_idx = 0;
                T best = T(0);
                bool first = true;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const std::size_t idx =
                            (static_cast<std::size_t>(c) * H + 2 * yo + dy) * W + 2 * xo + dx;
                        const T val = x->value.data[idx];
                        if (first || val > best) {
                            best = val;
                            best_idx = idx;
                            first = false;
                        }
                    }
                }
                const std::size_t oidx = (static_cast<std::size_t>(c) * Ho + yo) * Wo + xo;
                v.data[oidx] = best;
                (*argmax)[oidx] = best_idx;
            }
        }
    }
    VarT<T> out = tape.make(std::move(v), {x});
    NodeT<T>*o = out.get(), *px = x.get();
    out->back = [o, px, argmax] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i)
            px->grad.data[(*argmax)[i]] += o->grad.data[i];
    };
    return out;
}

/// Per-channel max over the spatial grid: (C,H,W) -> (C).
template <class T>
VarT<T> global_max_pool(TapeT<T>& tape, const VarT<T>& x) {
    if (x->value.rank() != 3)
        throw std::invalid_argument("global_max_pool: expected CHW, got " +
                                    x->value.shape_string());
    const int C = x->value.shape[0];
    const std::size_t plane = static_cast<std::size_t>(x->value.shape[1]) * x->value.shape[2];
    TensorT<T> v = TensorT<T>::zeros({C});
    auto argmax = std::make_shared<std::vector<std::size_t>>(C);
    for (int c = 0; c < C; ++c) {
        std::size_t best_idx = c * plane;
        T best = x->value.data[best_idx];
        for (std::size_t i = 1; i < plane; ++i) {
            const std::size_t idx = c * plane + i;
            if (x->value.data[idx] > best) {
                best = x->value.data[idx];
                best_idx = idx;
            }
        }
        v.data[c] = best;
        (*argmax)[c] = best_idx;
    }
    VarT<T> out = tape.make(std::move(v), {x});
    NodeT<T>*o = out.get(), *px = x.get();
    out->back = [o, px, argmax] {
        for (std::size_t c = 0; c < o->grad.data.size(); ++c)
            px->grad.data[(*argmax)[c]] += o->grad.data[c];
    };
    return out;
}

/// Fully connected layer: x (n), W (m,n), b (m) -> (m).
template <class T>
VarT<T> affine(TapeT<T>& tape, const VarT<T>& x, const VarT<T>& W, const VarT<T>& b) {
    if (x->value.rank() != 1 || W->value.rank() != 2 || b->value.rank() != 1 ||
        W->value.shape[1] != x->value.shape[0] || W->value.shape[0] != b->value.shape[0])
        throw std::invalid_argument("affine: incompatible shapes " + x->value.shape_string() +
                                    ", " + W->value.shape_string() + ", " +
                                    b->value.shape_string());
    const int m = W->value.shape[0], n = W->value.shape[1];
    TensorT<T> v = b->value;
    for (int i = 0; i < m; ++i) {
        T acc = v.data[i];
        for (int j = 0; j < n; ++j)
            acc += W->value.data[static_cast<std::size_t>(i) * n + j] * x->value.data[j];
        v.data[i] = acc;
    }
    VarT<T> out = tape.make(std::move(v), {x, W, b});
    NodeT<T>*o = out.get(), *px = x.get(), *pw = W.get(), *pbias = b.get();
    out->back = [o, px, pw, pbias, m, n] {
        for (int i = 0; i < m; ++i) {
            const T g = o->grad.data[i];
            pbias->grad.data[i] += g;
            for (int j = 0; j < n; ++j) {
                pw->grad.data[static_cast<std::size_t>(i) * n + j] += g * px->value.data[j];
                px->grad.data[j] += g * pw->value.data[static_cast<std::size_t>(i) * n + j];
            }
        }
    };
    return out;
}

/// Stacks equally shaped tensors along a new leading axis.
template <class T>
VarT<T> stack0(TapeT<T>& tape, const std::vector<VarT<T>>& parts) {
    if (parts.empty()) throw std::invalid_argument("stack0: no inputs");
    for (const auto& p : parts) require_same_shape(parts[0]->value, p->value, "stack0");
    const std::size_t piece = parts[0]->value.numel();
    std::vector<int> shape = parts[0]->value.shape;
    shape.insert(shape.begin(), static_cast<int>(parts.size()));
    TensorT<T> v = TensorT<T>::zeros(shape);
    for (std::size_t i = 0; i < parts.size(); ++i)
        std::copy(parts[i]->value.data.begin(), parts[i]->value.data.end(),
                  v.data.begin() + i * piece);
    VarT<T> out = tape.make(std::move(v), parts);
    NodeT<T>* o = out.get();
    std::vector<NodeT<T>*> raw;
    for (const auto& p : parts) raw.push_back(p.get());
    out->back = [o, raw, piece] {
        for (std::size_t i = 0; i < raw.size(); ++i)
            for (std::size_t j = 0; j < piece; ++j)
                raw[i]->grad.data[j] += o->grad.data[i * piece + j];
    };
    return out;
}

/// Contiguous slice along axis 0.
template <class T>
VarT<T> slice0(TapeT<T>& tape, const VarT<T>& x, int start, int len) {
    if (x->value.rank() < 1 || start < 0 || len < 1 || start + len > x->value.shape[0])
        throw std::invalid_argument("slice0: bad range [" + std::to_string(start) + "," +
                                    std::to_string(start + len) + ") for " +
                                    x->value.shape_string());
    std::size_t inner = 1;
    for (int i = 1; i < x->value.rank(); ++i) inner *= x->value.shape[i];
    std::vector<int> shape = x->value.shape;
    shape[0] = len;
    TensorT<T> v = TensorT<T>::zeros(shape);
    std::copy(x->value.data.begin() + start * inner,
              x->value.data.begin() + (start + len) * inner, v.data.begin());
    VarT<T> out = tape.make(std::move(v), {x});
    NodeT<T>*o = out.get(), *px = x.get();
    const std::size_t offset = static_cast<std::size_t>(start) * inner;
    out->back = [o, px, offset] {
        for (std::size_t i = 0; i < o->grad.data.size(); ++i)
            px->grad.data[offset + i] += o->grad.data[i];
    };
    return out;
}

}  // namespace nn
}  // namespace fsdet
