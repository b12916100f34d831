#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cleannet/error.hpp"
#include "cleannet/rng.hpp"
#include "cleannet/tensor.hpp"

namespace cleannet {

/// A named trainable tensor with its gradient and optimizer slot.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor velocity;

    explicit Parameter(std::string n, Tensor v)
        : name(std::move(n)),
          value(std::move(v)),
          grad(Tensor::zeros(value.shape)),
          velocity(Tensor::zeros(value.shape)) {}
};

/// Ordered registry of parameters. Insertion order is the canonical order
/// for optimizer sweeps, checkpoints and gradient checks. Elements live in
/// a deque so references stay valid as parameters are added.
class ParamStore {
public:
    Parameter& add(const std::string& name, Tensor init) {
        if (index_.count(name)) throw ContractError("ParamStore::add: duplicate parameter '" + name + "'");
        params_.emplace_back(name, std::move(init));
        index_[name] = params_.size() - 1;
        return params_.back();
    }

    Parameter& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw LookupError("ParamStore::get: no parameter '" + name + "'");
        return params_[it->second];
    }
    const Parameter& get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw LookupError("ParamStore::get: no parameter '" + name + "'");
        return params_[it->second];
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t size() const { return params_.size(); }
    Parameter& operator[](std::size_t i) { return params_[i]; }
    const Parameter& operator[](std::size_t i) const { return params_[i]; }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void zero_grad() {
        for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
    }

    std::map<std::string, Tensor> grad_map() const {
        std::map<std::string, Tensor> m;
        for (const auto& p : params_) m.emplace(p.name, p.grad);
        return m;
    }

    std::size_t coordinate_count() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.value.numel();
        return n;
    }

private:
    std::deque<Parameter> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

using NodeId = std::int32_t;

enum class OpKind {
    kConstant,
    kParam,
    kAffine,     // x[n,d] W[d,m] + b[m]
    kMatVec,     // A[n,m] x[m] -> [n]
    kTMatVec,    // A[n,m]^T x[n] -> [m]
    kTanh,
    kSoftmax,    // rank 1
    kCosine,     // scalar
    kSqDist,     // sum of squared differences, scalar
    kHinge,      // max(0, x - c), scalar
    kAdd,        // elementwise, equal shapes
    kAddN,       // sum of scalars
    kScale,      // c * x
    kShift,      // x + c
    kReshape,
    kNllSoftmax  // -log softmax(logits)[target], scalar
};

inline const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::kConstant: return "constant";
        case OpKind::kParam: return "param";
        case OpKind::kAffine: return "affine";
        case OpKind::kMatVec: return "matvec";
        case OpKind::kTMatVec: return "tmatvec";
        case OpKind::kTanh: return "tanh";
        case OpKind::kSoftmax: return "softmax";
        case OpKind::kCosine: return "cosine";
        case OpKind::kSqDist: return "squared_distance";
        case OpKind::kHinge: return "hinge";
        case OpKind::kAdd: return "add";
        case OpKind::kAddN: return "add_n";
        case OpKind::kScale: return "scale";
        case OpKind::kShift: return "shift";
        case OpKind::kReshape: return "reshape";
        case OpKind::kNllSoftmax: return "nll_softmax";
    }
    return "?";
}

/// Reverse-mode tape. A Graph is rebuilt per mini-batch: nodes are appended
/// in evaluation order, so insertion order is a topological order and the
/// backward sweep just walks the tape in reverse. Forward values are checked
/// for NaN/Inf as they are produced.
class Graph {
public:
    struct Node {
        OpKind op;
        std::vector<NodeId> inputs;
        Tensor value;
        Tensor grad;               // allocated lazily during backward
        Parameter* param = nullptr;
        double c = 0.0;            // scale factor / shift offset / hinge threshold
        std::size_t target = 0;    // nll_softmax class index
    };

    NodeId constant(Tensor v) {
        Node n;
        n.op = OpKind::kConstant;
        n.value = std::move(v);
        return push(std::move(n));
    }

    NodeId param(Parameter& p) {
        Node n;
        n.op = OpKind::kParam;
        n.value = p.value;
        n.param = &p;
        return push(std::move(n));
    }

    NodeId param(ParamStore& store, const std::string& name) { return param(store.get(name)); }

    /// out = x W + b, with b broadcast over the rows of x.
    NodeId affine(NodeId x, NodeId w, NodeId b) {
        const Tensor& xv = value(x);
        const Tensor& wv = value(w);
        const Tensor& bv = value(b);
        if (xv.rank() != 2 || wv.rank() != 2 || bv.rank() != 1)
            throw DimensionError("affine: expected x[n,d], W[d,m], b[m]");
        if (xv.cols() != wv.rows() || wv.cols() != bv.shape[0])
            throw DimensionError("affine: inner dimensions disagree: x" + xv.shape_str() + " W" +
                                 wv.shape_str() + " b" + bv.shape_str());
        const std::size_t nr = xv.rows(), d = xv.cols(), m = wv.cols();
        Tensor out = Tensor::zeros({nr, m});
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                const double xik = xv.at(i, k);
                if (xik == 0.0) continue;
                for (std::size_t j = 0; j < m; ++j) out.at(i, j) += xik * wv.at(k, j);
            }
            for (std::size_t j = 0; j < m; ++j) out.at(i, j) += bv.at(j);
        }
        Node n;
        n.op = OpKind::kAffine;
        n.inputs = {x, w, b};
        n.value = std::move(out);
        return push(std::move(n));
    }

    /// out = A x.
    NodeId matvec(NodeId a, NodeId x) {
        const Tensor& av = value(a);
        const Tensor& xv = value(x);
        if (av.rank() != 2 || xv.rank() != 1 || av.cols() != xv.shape[0])
            throw DimensionError("matvec: A" + av.shape_str() + " x" + xv.shape_str());
        const std::size_t nr = av.rows(), m = av.cols();
        Tensor out = Tensor::zeros({nr});
        for (std::size_t i = 0; i < nr; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += av.at(i, j) * xv.at(j);
            out.at(i) = s;
        }
        Node n;
        n.op = OpKind::kMatVec;
        n.inputs = {a, x};
        n.value = std::move(out);
        return push(std::move(n));
    }

    /// out = A^T x; with x a weight vector this is the weighted sum of A's rows.
    NodeId tmatvec(NodeId a, NodeId x) {
        const Tensor& av = value(a);
        const Tensor& xv = value(x);
        if (av.rank() != 2 || xv.rank() != 1 || av.rows() != xv.shape[0])
            throw DimensionError("tmatvec: A" + av.shape_str() + " x" + xv.shape_str());
        const std::size_t nr = av.rows(), m = av.cols();
        Tensor out = Tensor::zeros({m});
        for (std::size_t i = 0; i < nr; ++i) {
            const double xi = xv.at(i);
            for (std::size_t j = 0; j < m; ++j) out.at(j) += xi * av.at(i, j);
        }
        Node n;
        n.op = OpKind::kTMatVec;
        n.inputs = {a, x};
        n.value = std::move(out);
        return push(std::move(n));
    }

    NodeId tanh_act(NodeId x) {
        Tensor out = value(x);
        for (double& v : out.data) v = std::tanh(v);
        Node n;
        n.op = OpKind::kTanh;
        n.inputs = {x};
        n.value = std::move(out);
        return push(std::move(n));
    }

    /// Probability simplex over a rank-1 input, computed with max subtraction.
    NodeId softmax(NodeId x) {
        const Tensor& xv = value(x);
        if (xv.rank() != 1 || xv.numel() == 0) throw DimensionError("softmax: nonempty rank-1 input required");
        Node n;
        n.op = OpKind::kSoftmax;
        n.inputs = {x};
        n.value = softmax_values(xv);
        return push(std::move(n));
    }

    /// cos(a, b) as a scalar node, clamped to [-1, 1]. Rejects zero-norm inputs;
    /// the gradient formulas guard the norms with a 1e-12 epsilon.
    NodeId cosine(NodeId a, NodeId b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (!av.same_shape(bv)) throw DimensionError("cosine: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
        const double c = cosine_similarity(av.data, bv.data);
        Node n;
        n.op = OpKind::kCosine;
        n.inputs = {a, b};
        n.value = Tensor::scalar(c);
        return push(std::move(n));
    }

    /// Squared Euclidean distance: sum of squared differences.
    NodeId squared_distance(NodeId a, NodeId b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (!av.same_shape(bv))
            throw DimensionError("squared_distance: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
        double s = 0.0;
        for (std::size_t i = 0; i < av.numel(); ++i) {
            const double d = av.at(i) - bv.at(i);
            s += d * d;
        }
        Node n;
        n.op = OpKind::kSqDist;
        n.inputs = {a, b};
        n.value = Tensor::scalar(s);
        return push(std::move(n));
    }

    /// max(0, x - threshold) for a scalar x. Subgradient 0 at the kink.
    NodeId hinge(NodeId x, double threshold) {
        const double xv = value(x).item();
        Node n;
        n.op = OpKind::kHinge;
        n.inputs = {x};
        n.c = threshold;
        n.value = Tensor::scalar(xv > threshold ? xv - threshold : 0.0);
        return push(std::move(n));
    }

    NodeId add(NodeId a, NodeId b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (!av.same_shape(bv)) throw DimensionError("add: shape mismatch");
        Tensor out = av;
        for (std::size_t i = 0; i < out.numel(); ++i) out.at(i) += bv.at(i);
        Node n;
        n.op = OpKind::kAdd;
        n.inputs = {a, b};
        n.value = std::move(out);
        return push(std::move(n));
    }

    /// Sum of scalar nodes.
    NodeId add_n(const std::vector<NodeId>& xs) {
        if (xs.empty()) throw ContractError("add_n: empty input list");
        double s = 0.0;
        for (NodeId id : xs) s += value(id).item();
        Node n;
        n.op = OpKind::kAddN;
        n.inputs = xs;
        n.value = Tensor::scalar(s);
        return push(std::move(n));
    }

    NodeId scale(NodeId x, double c) {
        Tensor out = value(x);
        for (double& v : out.data) v *= c;
        Node n;
        n.op = OpKind::kScale;
        n.inputs = {x};
        n.c = c;
        n.value = std::move(out);
        return push(std::move(n));
    }

    NodeId shift(NodeId x, double c) {
        Tensor out = value(x);
        for (double& v : out.data) v += c;
        Node n;
        n.op = OpKind::kShift;
        n.inputs = {x};
        n.c = c;
        n.value = std::move(out);
        return push(std::move(n));
    }

    NodeId reshape(NodeId x, std::vector<std::size_t> shape) {
        const Tensor& xv = value(x);
        if (Tensor::shape_numel(shape) != xv.numel()) throw DimensionError("reshape: element count mismatch");
        Node n;
        n.op = OpKind::kReshape;
        n.inputs = {x};
        n.value = Tensor(std::move(shape), xv.data);
        return push(std::move(n));
    }

    /// Fused cross entropy: -log(softmax(logits)[target]). The probability is
    /// floored at 1e-12 before the log; clamped evaluations are counted so
    /// callers can flag them.
    NodeId nll_softmax(NodeId logits, std::size_t target) {
        const Tensor& lv = value(logits);
        if (lv.rank() != 1) throw DimensionError("nll_softmax: rank-1 logits required");
        if (target >= lv.numel()) throw ContractError("nll_softmax: target out of range");
        const Tensor probs = softmax_values(lv);
        double p = probs.at(target);
        if (p < 1e-12) {
            p = 1e-12;
            ++log_clamp_count_;
        }
        Node n;
        n.op = OpKind::kNllSoftmax;
        n.inputs = {logits};
        n.target = target;
        n.value = Tensor::scalar(-std::log(p));
        return push(std::move(n));
    }

    const Tensor& value(NodeId id) const { return nodes_[check_id(id)].value; }

    /// Gradient of the loss w.r.t. a node, valid after backward().
    const Tensor& grad(NodeId id) const {
        const Node& n = nodes_[check_id(id)];
        if (n.grad.numel() == 0) throw ContractError("Graph::grad: backward has not reached this node");
        return n.grad;
    }

    std::size_t size() const { return nodes_.size(); }
    std::size_t log_clamp_count() const { return log_clamp_count_; }

    /// Reverse sweep from a scalar loss node. Zeroes the gradients of every
    /// parameter in `params` first, so parameters the loss does not reach are
    /// left with exact zero gradients, then accumulates into Parameter::grad.
    void backward(NodeId loss, ParamStore& params) {
        params.zero_grad();
        backward_accumulate(loss);
    }

    /// Same sweep without the zeroing; adds into whatever is in the grad slots.
    void backward_accumulate(NodeId loss) {
        const std::size_t li = check_id(loss);
        if (nodes_[li].value.numel() != 1)
            throw ContractError("backward: loss node must be scalar, got " + nodes_[li].value.shape_str());
        for (auto& n : nodes_) n.grad = Tensor();
        nodes_[li].grad = Tensor(nodes_[li].value.shape, {1.0});
        for (std::size_t i = li + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.grad.numel() == 0) continue;  // loss does not depend on this node
            propagate(n);
        }
    }

private:
    static Tensor softmax_values(const Tensor& x) {
        double mx = x.at(0);
        for (double v : x.data) mx = std::max(mx, v);
        Tensor out = x;
        double sum = 0.0;
        for (double& v : out.data) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : out.data) v /= sum;
        return out;
    }

    std::size_t check_id(NodeId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw ContractError("Graph: node id out of range");
        return static_cast<std::size_t>(id);
    }

    NodeId push(Node n) {
        if (!n.value.all_finite())
            throw NumericError(std::string("non-finite value produced by op '") + op_name(n.op) + "'");
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    Tensor& grad_slot(NodeId id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.numel() == 0 && n.value.numel() > 0) n.grad = Tensor::zeros(n.value.shape);
        return n.grad;
    }

    void propagate(Node& n) {
        const Tensor& g = n.grad;
        switch (n.op) {
            case OpKind::kConstant:
                break;
            case OpKind::kParam:
                for (std::size_t i = 0; i < g.numel(); ++i) n.param->grad.at(i) += g.at(i);
                break;
            case OpKind::kAffine: {
                const Tensor& xv = nodes_[n.inputs[0]].value;
                const Tensor& wv = nodes_[n.inputs[1]].value;
                Tensor& gx = grad_slot(n.inputs[0]);
                Tensor& gw = grad_slot(n.inputs[1]);
                Tensor& gb = grad_slot(n.inputs[2]);
                const std::size_t nr = xv.rows(), d = xv.cols(), m = wv.cols();
                for (std::size_t i = 0; i < nr; ++i) {
                    for (std::size_t j = 0; j < m; ++j) {
                        const double gij = g.at(i, j);
                        if (gij == 0.0) continue;
                        gb.at(j) += gij;
                        for (std::size_t k = 0; k < d; ++k) {
                            gx.at(i, k) += gij * wv.at(k, j);
                            gw.at(k, j) += gij * xv.at(i, k);
                        }
                    }
                }
                break;
            }
            case OpKind::kMatVec: {
                const Tensor& av = nodes_[n.inputs[0]].value;
                const Tensor& xv = nodes_[n.inputs[1]].value;
                Tensor& ga = grad_slot(n.inputs[0]);
                Tensor& gx = grad_slot(n.inputs[1]);
                for (std::size_t i = 0; i < av.rows(); ++i) {
                    const double gi = g.at(i);
                    if (gi == 0.0) continue;
                    for (std::size_t j = 0; j < av.cols(); ++j) {
                        ga.at(i, j) += gi * xv.at(j);
                        gx.at(j) += gi * av.at(i, j);
                    }
                }
                break;
            }
            case OpKind::kTMatVec: {
                const Tensor& av = nodes_[n.inputs[0]].value;
                const Tensor& xv = nodes_[n.inputs[1]].value;
                Tensor& ga = grad_slot(n.inputs[0]);
                Tensor& gx = grad_slot(n.inputs[1]);
                for (std::size_t i = 0; i < av.rows(); ++i) {
                    const double xi = xv.at(i);
                    double acc = 0.0;
                    for (std::size_t j = 0; j < av.cols(); ++j) {
                        const double gj = g.at(j);
                        ga.at(i, j) += xi * gj;
                        acc += gj * av.at(i, j);
                    }
                    gx.at(i) += acc;
                }
                break;
            }
            case OpKind::kTanh: {
                Tensor& gx = grad_slot(n.inputs[0]);
                for (std::size_t i = 0; i < g.numel(); ++i) {
                    const double y = n.value.at(i);
                    gx.at(i) += g.at(i) * (1.0 - y * y);
                }
                break;
            }
            case OpKind::kSoftmax: {
                Tensor& gx = grad_slot(n.inputs[0]);
                double inner = 0.0;
                for (std::size_t i = 0; i < g.numel(); ++i) inner += g.at(i) * n.value.at(i);
                for (std::size_t i = 0; i < g.numel(); ++i)
                    gx.at(i) += n.value.at(i) * (g.at(i) - inner);
                break;
            }
            case OpKind::kCosine: {
                const Tensor& av = nodes_[n.inputs[0]].value;
                const Tensor& bv = nodes_[n.inputs[1]].value;
                Tensor& ga = grad_slot(n.inputs[0]);
                Tensor& gb = grad_slot(n.inputs[1]);
                const double gs = g.item();
                const double na = norm(av.data) + 1e-12;
                const double nb = norm(bv.data) + 1e-12;
                const double s = n.value.item();
                for (std::size_t i = 0; i < av.numel(); ++i) {
                    ga.at(i) += gs * (bv.at(i) / (na * nb) - s * av.at(i) / (na * na));
                    gb.at(i) += gs * (av.at(i) / (na * nb) - s * bv.at(i) / (nb * nb));
                }
                break;
            }
            case OpKind::kSqDist: {
                const Tensor& av = nodes_[n.inputs[0]].value;
                const Tensor& bv = nodes_[n.inputs[1]].value;
                Tensor& ga = grad_slot(n.inputs[0]);
                Tensor& gb = grad_slot(n.inputs[1]);
                const double gs = g.item();
                for (std::size_t i = 0; i < av.numel(); ++i) {
                    const double d = av.at(i) - bv.at(i);
                    ga.at(i) += gs * 2.0 * d;
                    gb.at(i) -= gs * 2.0 * d;
                }
                break;
            }
            case OpKind::kHinge: {
                const double xv = nodes_[n.inputs[0]].value.item();
                if (xv > n.c) grad_slot(n.inputs[0]).at(0) += g.item();
                break;
            }
            case OpKind::kAdd: {
                Tensor& ga = grad_slot(n.inputs[0]);
                Tensor& gb = grad_slot(n.inputs[1]);
                for (std::size_t i = 0; i < g.numel(); ++i) {
                    ga.at(i) += g.at(i);
                    gb.at(i) += g.at(i);
                }
                break;
            }
            case OpKind::kAddN: {
                const double gs = g.item();
                for (NodeId in : n.inputs) grad_slot(in).at(0) += gs;
                break;
            }
            case OpKind::kScale: {
                Tensor& gx = grad_slot(n.inputs[0]);
                for (std::size_t i = 0; i < g.numel(); ++i) gx.at(i) += n.c * g.at(i);
                break;
            }
            case OpKind::kShift: {
                Tensor& gx = grad_slot(n.inputs[0]);
                for (std::size_t i = 0; i < g.numel(); ++i) gx.at(i) += g.at(i);
                break;
            }
            case OpKind::kReshape: {
                Tensor& gx = grad_slot(n.inputs[0]);
                for (std::size_t i = 0; i < g.numel(); ++i) gx.at(i) += g.at(i);
                break;
            }
            case OpKind::kNllSoftmax: {
                const Tensor& lv = nodes_[n.inputs[0]].value;
                Tensor& gl = grad_slot(n.inputs[0]);
                const Tensor probs = softmax_values(lv);
                const double gs = g.item();
                for (std::size_t i = 0; i < lv.numel(); ++i) {
                    const double onehot = (i == n.target) ? 1.0 : 0.0;
                    gl.at(i) += gs * (probs.at(i) - onehot);
                }
                break;
            }
        }
    }

    std::vector<Node> nodes_;
    std::size_t log_clamp_count_ = 0;
};

/// One SGD step with classical momentum: v <- momentum*v + grad,
/// theta <- theta - lr*v. Rejects non-finite gradients.
inline void sgd_step(ParamStore& params, double lr, double momentum) {
    if (!(lr > 0.0)) throw ValidationError("sgd_step: lr must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("sgd_step: momentum must be in [0,1)");
    for (auto& p : params) {
        if (!p.grad.all_finite())
            throw TrainingError("sgd_step: non-finite gradient for parameter '" + p.name + "'");
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            p.velocity.at(i) = momentum * p.velocity.at(i) + p.grad.at(i);
            p.value.at(i) -= lr * p.velocity.at(i);
        }
    }
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_coord = 0;
};

/// Compares the analytic gradients of a scalar function against central
/// finite differences, coordinate by coordinate over every parameter in
/// `params`. `f(true)` must rebuild the loss from the current parameter
/// values, run backward into `params`, and return the loss; `f(false)` must
/// return the loss value without touching gradients. Reports
/// max |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
inline GradCheckResult grad_check(ParamStore& params, const std::function<double(bool)>& f, double step) {
    if (!(step > 0.0)) throw ValidationError("grad_check: step must be positive");
    const double base = f(true);
    if (!std::isfinite(base)) throw NumericError("grad_check: function value is not finite");
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p.grad);

    GradCheckResult res;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = params[pi];
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const double saved = p.value.at(i);
            p.value.at(i) = saved + step;
            const double fp = f(false);
            p.value.at(i) = saved - step;
            const double fm = f(false);
            p.value.at(i) = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw NumericError("grad_check: perturbed function value is not finite");
            const double numeric = (fp - fm) / (2.0 * step);
            const double a = analytic[pi].at(i);
            const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_param = p.name;
                res.worst_coord = i;
            }
        }
    }
    return res;
}

/// Glorot-uniform initialization: entries uniform in +-sqrt(6/(fan_in+fan_out)).
inline Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::vector<std::size_t> shape, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace cleannet
