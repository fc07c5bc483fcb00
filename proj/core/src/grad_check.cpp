// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/grad_check.hpp"

#include <cmath>
#include <stdexcept>

#include "hyptax/errors.hpp"

namespace hyptax::autodiff {

namespace {

double eval_loss(const LossBuilder& loss_fn, const ParamMap& params) {
    Graph g;
    std::map<std::string, Var> vars;
    for (const auto& [name, tensor] : params) {
        vars.emplace(name, g.leaf(tensor));
    }
    return scalar(loss_fn(g, vars));
}

}  // namespace

GradCheckReport check_gradient(const LossBuilder& loss_fn, const ParamMap& params,
                               double step) {
    if (!(step >= 1e-6 && step <= 1e-3)) {
        throw std::invalid_argument("check_gradient: step must lie in [1e-6, 1e-3]");
    }

    // analytic pass
    Graph g;
    std::map<std::string, Var> vars;
    for (const auto& [name, tensor] : params) {
        vars.emplace(name, g.leaf(tensor));
    }
    Var root = loss_fn(g, vars);
    const double base = scalar(root);
    if (!std::isfinite(base)) {
        throw NumericError("check_gradient: non-finite loss at the base point");
    }
    g.backward(root);

    GradCheckReport report;
    ParamMap probe = params;
    for (const auto& [name, tensor] : params) {
        const Tensor& analytic = g.grad(vars.at(name));
        double param_err = 0.0;
        Tensor& mutable_tensor = probe.at(name);
        for (int k = 0; k < tensor.size(); ++k) {
            const double x = tensor.data[k];
            const double h = step * std::max(1.0, std::abs(x));

            mutable_tensor.data[k] = x + h;
            const double fp = eval_loss(loss_fn, probe);
            if (!std::isfinite(fp)) {
                throw NumericError("check_gradient: non-finite loss at probe '" + name +
                                   "'[" + std::to_string(k) + "] (+h)");
            }
            mutable_tensor.data[k] = x - h;
            const double fm = eval_loss(loss_fn, probe);
            if (!std::isfinite(fm)) {
                throw NumericError("check_gradient: non-finite loss at probe '" + name +
                                   "'[" + std::to_string(k) + "] (-h)");
            }
            mutable_tensor.data[k] = x;

            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic.data[k];
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-12});
            param_err = std::max(param_err, rel);
        }
        report.per_param.emplace_back(name, param_err);
        report.max_relative_error = std::max(report.max_relative_error, param_err);
    }
    return report;
}

}  // namespace hyptax::autodiff
