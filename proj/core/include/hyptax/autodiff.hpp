// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "hyptax/tensor.hpp"

namespace hyptax::autodiff {

class Graph;

/// Lightweight handle to a node owned by a Graph.
struct Var {
    Graph* graph = nullptr;
    int id = -1;
};

/// Define-by-run reverse-mode tape over Tensor values.
///
/// Values are computed eagerly as ops are applied, so the tape order is a
/// topological order by construction and cycles cannot form. backward() walks
/// the tape in reverse with a fixed, single-threaded reduction order;
/// gradients of fan-out nodes accumulate additively.
class Graph {
public:
    /// Differentiable input (parameter).
    Var leaf(Tensor value);
    /// Non-differentiable input (data, masks).
    Var constant(Tensor value);

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

    /// Reverse pass from a scalar root; fills grad on every node that
    /// requires it. Throws NumericError when the root is not 1x1.
    void backward(Var root);

    std::size_t size() const { return nodes_.size(); }

    // -- op-implementation interface --
    Var make(Tensor value, bool requires_grad,
             std::function<void(Graph&, const Tensor& upstream)> backprop);
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
    Tensor& grad_ref(int id) { return nodes_[id].grad; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::function<void(Graph&, const Tensor& upstream)> backprop;
    };
    std::vector<Node> nodes_;
};

/// Eagerly computed value of a node.
inline const Tensor& forward(Var v) { return v.graph->value(v); }
/// Value of a 1x1 node.
double scalar(Var v);

// Elementwise binary ops with limited broadcasting: operands must match in
// each dimension or have extent 1 there (scalars, row and column vectors).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

Var add(Var a, double b);
Var sub(Var a, double b);
Var sub(double a, Var b);
Var mul(Var a, double b);
Var div(Var a, double b);
Var div(double a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator+(Var a, double b) { return add(a, b); }
inline Var operator-(Var a, double b) { return sub(a, b); }
inline Var operator*(Var a, double b) { return mul(a, b); }
inline Var operator/(Var a, double b) { return div(a, b); }
inline Var operator-(double a, Var b) { return sub(a, b); }
inline Var operator/(double a, Var b) { return div(a, b); }

Var neg(Var a);
Var exp(Var a);
Var log(Var a);
Var cosh(Var a);
Var sinh(Var a);
Var sqrt(Var a);
Var relu(Var a);  // max(x, 0)

/// sinh(z)/z with the series limit 1 at z = 0 (stable exp-map scaling).
Var sinhc(Var a);

// Clamped inverse trig/hyperbolic primitives. The forward value clamps the
// argument to the exact domain boundary; the gradient is evaluated at an
// eps-inset argument so it stays finite at the boundary.
Var acosh_clamped(Var a, double eps);  // domain floor 1
Var asin_clamped(Var a, double eps);   // domain [-1, 1]
Var acos_clamped(Var a, double eps);   // domain [-1, 1]

/// max(x, floor), composed as relu(x - floor) + floor.
Var clamp_min(Var a, double floor);

Var matmul(Var a, Var b);
Var transpose(Var a);
/// Inner product of two same-shape tensors: sum(a*b).
Var dot(Var a, Var b);

Var sum(Var a);   // -> 1x1
Var mean(Var a);  // -> 1x1
/// Euclidean norm of each row: m x n -> m x 1. Zero rows get zero gradient.
Var row_norm(Var a);

/// Mean over rows of [logsumexp(row) - row[target]]; targets indexes a column
/// per row. The standard softmax cross entropy with integer targets.
Var softmax_cross_entropy(Var logits, const std::vector<int>& targets);

}  // namespace hyptax::autodiff
