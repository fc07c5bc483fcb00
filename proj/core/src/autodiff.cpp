// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "hyptax/errors.hpp"

namespace hyptax::autodiff {

namespace {

void check_same_graph(Var a, Var b, const char* op) {
    if (a.graph == nullptr || a.graph != b.graph) {
        throw std::invalid_argument(std::string(op) +
                                    ": operands belong to different graphs");
    }
}

}  // namespace

Var Graph::make(Tensor value, bool requires_grad,
                std::function<void(Graph&, const Tensor&)> backprop) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::leaf(Tensor value) { return make(std::move(value), true, nullptr); }

Var Graph::constant(Tensor value) { return make(std::move(value), false, nullptr); }

void Graph::backward(Var root) {
    if (root.graph != this) {
        throw std::invalid_argument("backward: root from another graph");
    }
    if (!nodes_[root.id].value.is_scalar()) {
        throw NumericError("backward: root must be a scalar (1x1)");
    }
    for (Node& n : nodes_) {
        n.grad = Tensor::zeros(n.value.rows, n.value.cols);
    }
    nodes_[root.id].grad = Tensor::scalar(1.0);
    for (int i = root.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.requires_grad && n.backprop) {
            n.backprop(*this, n.grad);
        }
    }
}

double scalar(Var v) {
    const Tensor& t = forward(v);
    if (!t.is_scalar()) {
        throw std::invalid_argument("scalar: node is not 1x1");
    }
    return t.scalar_value();
}

// ---------------------------------------------------------------------------
// elementwise binary ops with broadcasting
// ---------------------------------------------------------------------------

namespace {

enum class BinOp { Add, Sub, Mul, Div };

const char* name_of(BinOp op) {
    switch (op) {
        case BinOp::Add: return "add";
        case BinOp::Sub: return "sub";
        case BinOp::Mul: return "mul";
        case BinOp::Div: return "div";
    }
    return "?";
}

Var binary(Var a, Var b, BinOp op) {
    check_same_graph(a, b, name_of(op));
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);

    const int R = std::max(av.rows, bv.rows);
    const int C = std::max(av.cols, bv.cols);
    const bool ok = (av.rows == R || av.rows == 1) && (bv.rows == R || bv.rows == 1) &&
                    (av.cols == C || av.cols == 1) && (bv.cols == C || bv.cols == 1);
    if (!ok) {
        throw std::invalid_argument(std::string(name_of(op)) + ": shapes " +
                                    std::to_string(av.rows) + "x" + std::to_string(av.cols) +
                                    " and " + std::to_string(bv.rows) + "x" +
                                    std::to_string(bv.cols) + " do not broadcast");
    }

    Tensor out(R, C);
    for (int i = 0; i < R; ++i) {
        const int ai = av.rows == 1 ? 0 : i;
        const int bi = bv.rows == 1 ? 0 : i;
        for (int j = 0; j < C; ++j) {
            const int aj = av.cols == 1 ? 0 : j;
            const int bj = bv.cols == 1 ? 0 : j;
            const double x = av.at(ai, aj);
            const double y = bv.at(bi, bj);
            double z = 0.0;
            switch (op) {
                case BinOp::Add: z = x + y; break;
                case BinOp::Sub: z = x - y; break;
                case BinOp::Mul: z = x * y; break;
                case BinOp::Div: z = x / y; break;
            }
            out.at(i, j) = z;
        }
    }

    const bool needs = g.requires_grad(a) || g.requires_grad(b);
    const int aid = a.id, bid = b.id;
    return g.make(std::move(out), needs, [aid, bid, op, R, C](Graph& g2, const Tensor& up) {
        const Tensor& av2 = g2.value(Var{&g2, aid});
        const Tensor& bv2 = g2.value(Var{&g2, bid});
        const bool ga = g2.requires_grad(Var{&g2, aid});
        const bool gb = g2.requires_grad(Var{&g2, bid});
        Tensor& agrad = g2.grad_ref(aid);
        Tensor& bgrad = g2.grad_ref(bid);
        for (int i = 0; i < R; ++i) {
            const int ai = av2.rows == 1 ? 0 : i;
            const int bi = bv2.rows == 1 ? 0 : i;
            for (int j = 0; j < C; ++j) {
                const int aj = av2.cols == 1 ? 0 : j;
                const int bj = bv2.cols == 1 ? 0 : j;
                const double u = up.at(i, j);
                const double x = av2.at(ai, aj);
                const double y = bv2.at(bi, bj);
                switch (op) {
                    case BinOp::Add:
                        if (ga) agrad.at(ai, aj) += u;
                        if (gb) bgrad.at(bi, bj) += u;
                        break;
                    case BinOp::Sub:
                        if (ga) agrad.at(ai, aj) += u;
                        if (gb) bgrad.at(bi, bj) -= u;
                        break;
                    case BinOp::Mul:
                        if (ga) agrad.at(ai, aj) += u * y;
                        if (gb) bgrad.at(bi, bj) += u * x;
                        break;
                    case BinOp::Div:
                        if (ga) agrad.at(ai, aj) += u / y;
                        if (gb) bgrad.at(bi, bj) -= u * x / (y * y);
                        break;
                }
            }
        }
    });
}

Var const_scalar(Var like, double v) { return like.graph->constant(Tensor::scalar(v)); }

}  // namespace

Var add(Var a, Var b) { return binary(a, b, BinOp::Add); }
Var sub(Var a, Var b) { return binary(a, b, BinOp::Sub); }
Var mul(Var a, Var b) { return binary(a, b, BinOp::Mul); }
Var div(Var a, Var b) { return binary(a, b, BinOp::Div); }

Var add(Var a, double b) { return add(a, const_scalar(a, b)); }
Var sub(Var a, double b) { return sub(a, const_scalar(a, b)); }
Var sub(double a, Var b) { return sub(const_scalar(b, a), b); }
Var mul(Var a, double b) { return mul(a, const_scalar(a, b)); }
Var div(Var a, double b) { return div(a, const_scalar(a, b)); }
Var div(double a, Var b) { return div(const_scalar(b, a), b); }

// ---------------------------------------------------------------------------
// elementwise unary ops
// ---------------------------------------------------------------------------

namespace {

enum class UnOp { Neg, Exp, Log, Cosh, Sinh, Sqrt, Relu, Sinhc, AcoshC, AsinC, AcosC };

double un_forward(UnOp op, double x) {
    switch (op) {
        case UnOp::Neg: return -x;
        case UnOp::Exp: return std::exp(x);
        case UnOp::Log: return std::log(x);
        case UnOp::Cosh: return std::cosh(x);
        case UnOp::Sinh: return std::sinh(x);
        case UnOp::Sqrt: return std::sqrt(x);
        case UnOp::Relu: return x > 0.0 ? x : 0.0;
        case UnOp::Sinhc: return std::abs(x) < 1e-8 ? 1.0 + x * x / 6.0 : std::sinh(x) / x;
        case UnOp::AcoshC: return std::acosh(std::max(x, 1.0));
        case UnOp::AsinC: return std::asin(std::clamp(x, -1.0, 1.0));
        case UnOp::AcosC: return std::acos(std::clamp(x, -1.0, 1.0));
    }
    return 0.0;
}

double un_derivative(UnOp op, double x, double eps) {
    switch (op) {
        case UnOp::Neg: return -1.0;
        case UnOp::Exp: return std::exp(x);
        case UnOp::Log: return 1.0 / x;
        case UnOp::Cosh: return std::sinh(x);
        case UnOp::Sinh: return std::cosh(x);
        case UnOp::Sqrt: return 0.5 / std::sqrt(x);
        case UnOp::Relu: return x > 0.0 ? 1.0 : 0.0;
        case UnOp::Sinhc: {
            if (std::abs(x) < 1e-4) return x / 3.0 + x * x * x / 30.0;
            return (x * std::cosh(x) - std::sinh(x)) / (x * x);
        }
        case UnOp::AcoshC: {
            // zero beyond the clamp (the forward value is constant there);
            // eps-inset keeps the derivative finite at the domain edge
            if (x < 1.0) return 0.0;
            const double z = std::max(x, 1.0 + eps);
            return 1.0 / std::sqrt(z * z - 1.0);
        }
        case UnOp::AsinC: {
            if (x < -1.0 || x > 1.0) return 0.0;
            const double z = std::clamp(x, -(1.0 - eps), 1.0 - eps);
            return 1.0 / std::sqrt(1.0 - z * z);
        }
        case UnOp::AcosC: {
            if (x < -1.0 || x > 1.0) return 0.0;
            const double z = std::clamp(x, -(1.0 - eps), 1.0 - eps);
            return -1.0 / std::sqrt(1.0 - z * z);
        }
    }
    return 0.0;
}

Var unary(Var a, UnOp op, double eps = 0.0) {
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    Tensor out(av.rows, av.cols);
    for (int k = 0; k < av.size(); ++k) out.data[k] = un_forward(op, av.data[k]);

    const int aid = a.id;
    return g.make(std::move(out), g.requires_grad(a), [aid, op, eps](Graph& g2, const Tensor& up) {
        const Tensor& av2 = g2.value(Var{&g2, aid});
        Tensor& agrad = g2.grad_ref(aid);
        for (int k = 0; k < av2.size(); ++k) {
            agrad.data[k] += up.data[k] * un_derivative(op, av2.data[k], eps);
        }
    });
}

}  // namespace

Var neg(Var a) { return unary(a, UnOp::Neg); }
Var exp(Var a) { return unary(a, UnOp::Exp); }
Var log(Var a) { return unary(a, UnOp::Log); }
Var cosh(Var a) { return unary(a, UnOp::Cosh); }
Var sinh(Var a) { return unary(a, UnOp::Sinh); }
Var sqrt(Var a) { return unary(a, UnOp::Sqrt); }
Var relu(Var a) { return unary(a, UnOp::Relu); }
Var sinhc(Var a) { return unary(a, UnOp::Sinhc); }
Var acosh_clamped(Var a, double eps) { return unary(a, UnOp::AcoshC, eps); }
Var asin_clamped(Var a, double eps) { return unary(a, UnOp::AsinC, eps); }
Var acos_clamped(Var a, double eps) { return unary(a, UnOp::AcosC, eps); }

Var clamp_min(Var a, double floor) { return add(relu(sub(a, floor)), floor); }

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
    check_same_graph(a, b, "matmul");
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    if (av.cols != bv.rows) {
        throw std::invalid_argument("matmul: inner dimensions differ (" +
                                    std::to_string(av.cols) + " vs " +
                                    std::to_string(bv.rows) + ")");
    }
    const int M = av.rows, K = av.cols, N = bv.cols;
    Tensor out(M, N);
    for (int i = 0; i < M; ++i) {
        for (int k = 0; k < K; ++k) {
            const double aik = av.at(i, k);
            for (int j = 0; j < N; ++j) out.at(i, j) += aik * bv.at(k, j);
        }
    }

    const bool needs = g.requires_grad(a) || g.requires_grad(b);
    const int aid = a.id, bid = b.id;
    return g.make(std::move(out), needs, [aid, bid, M, K, N](Graph& g2, const Tensor& up) {
        const Tensor& av2 = g2.value(Var{&g2, aid});
        const Tensor& bv2 = g2.value(Var{&g2, bid});
        if (g2.requires_grad(Var{&g2, aid})) {
            Tensor& agrad = g2.grad_ref(aid);
            for (int i = 0; i < M; ++i) {
                for (int k = 0; k < K; ++k) {
                    double s = 0.0;
                    for (int j = 0; j < N; ++j) s += up.at(i, j) * bv2.at(k, j);
                    agrad.at(i, k) += s;
                }
            }
        }
        if (g2.requires_grad(Var{&g2, bid})) {
            Tensor& bgrad = g2.grad_ref(bid);
            for (int k = 0; k < K; ++k) {
                for (int j = 0; j < N; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < M; ++i) s += av2.at(i, k) * up.at(i, j);
                    bgrad.at(k, j) += s;
                }
            }
        }
    });
}

Var transpose(Var a) {
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    Tensor out(av.cols, av.rows);
    for (int i = 0; i < av.rows; ++i) {
        for (int j = 0; j < av.cols; ++j) out.at(j, i) = av.at(i, j);
    }
    const int aid = a.id;
    return g.make(std::move(out), g.requires_grad(a), [aid](Graph& g2, const Tensor& up) {
        Tensor& agrad = g2.grad_ref(aid);
        for (int i = 0; i < up.rows; ++i) {
            for (int j = 0; j < up.cols; ++j) agrad.at(j, i) += up.at(i, j);
        }
    });
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

Var sum(Var a) {
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    double s = 0.0;
    for (double x : av.data) s += x;
    const int aid = a.id;
    return g.make(Tensor::scalar(s), g.requires_grad(a), [aid](Graph& g2, const Tensor& up) {
        Tensor& agrad = g2.grad_ref(aid);
        const double u = up.scalar_value();
        for (double& x : agrad.data) x += u;
    });
}

Var mean(Var a) {
    const int n = a.graph->value(a).size();
    if (n == 0) throw std::invalid_argument("mean: empty tensor");
    return div(sum(a), static_cast<double>(n));
}

Var row_norm(Var a) {
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    Tensor out(av.rows, 1);
    for (int i = 0; i < av.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < av.cols; ++j) s += av.at(i, j) * av.at(i, j);
        out.at(i, 0) = std::sqrt(s);
    }
    const int aid = a.id;
    return g.make(std::move(out), g.requires_grad(a), [aid](Graph& g2, const Tensor& up) {
        const Tensor& av2 = g2.value(Var{&g2, aid});
        Tensor& agrad = g2.grad_ref(aid);
        for (int i = 0; i < av2.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < av2.cols; ++j) s += av2.at(i, j) * av2.at(i, j);
            const double norm = std::sqrt(s);
            if (norm <= 0.0) continue;  // zero row: zero subgradient
            const double u = up.at(i, 0);
            for (int j = 0; j < av2.cols; ++j) {
                agrad.at(i, j) += u * av2.at(i, j) / norm;
            }
        }
    });
}

Var softmax_cross_entropy(Var logits, const std::vector<int>& targets) {
    Graph& g = *logits.graph;
    const Tensor& lv = g.value(logits);
    if (lv.rows < 1) throw std::invalid_argument("softmax_cross_entropy: empty batch");
    if (static_cast<int>(targets.size()) != lv.rows) {
        throw std::invalid_argument("softmax_cross_entropy: one target per row required");
    }
    for (int t : targets) {
        if (t < 0 || t >= lv.cols) {
            throw std::invalid_argument("softmax_cross_entropy: target column out of range");
        }
    }

    double total = 0.0;
    for (int i = 0; i < lv.rows; ++i) {
        double mx = lv.at(i, 0);
        for (int j = 1; j < lv.cols; ++j) mx = std::max(mx, lv.at(i, j));
        double z = 0.0;
        for (int j = 0; j < lv.cols; ++j) z += std::exp(lv.at(i, j) - mx);
        total += mx + std::log(z) - lv.at(i, targets[i]);
    }
    total /= lv.rows;

    const int lid = logits.id;
    const std::vector<int> tgt = targets;
    return g.make(Tensor::scalar(total), g.requires_grad(logits),
                  [lid, tgt](Graph& g2, const Tensor& up) {
                      const Tensor& lv2 = g2.value(Var{&g2, lid});
                      Tensor& lgrad = g2.grad_ref(lid);
                      const double u = up.scalar_value() / lv2.rows;
                      for (int i = 0; i < lv2.rows; ++i) {
                          double mx = lv2.at(i, 0);
                          for (int j = 1; j < lv2.cols; ++j) mx = std::max(mx, lv2.at(i, j));
                          double z = 0.0;
                          for (int j = 0; j < lv2.cols; ++j) z += std::exp(lv2.at(i, j) - mx);
                          for (int j = 0; j < lv2.cols; ++j) {
                              const double p = std::exp(lv2.at(i, j) - mx) / z;
                              lgrad.at(i, j) += u * (p - (j == tgt[i] ? 1.0 : 0.0));
                          }
                      }
                  });
}

}  // namespace hyptax::autodiff
