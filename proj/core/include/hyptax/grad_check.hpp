// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hyptax/autodiff.hpp"

namespace hyptax::autodiff {

using ParamMap = std::map<std::string, Tensor>;

/// Builds a scalar loss node from named parameter leaves on a fresh graph.
using LossBuilder = std::function<Var(Graph&, const std::map<std::string, Var>&)>;

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::vector<std::pair<std::string, double>> per_param;  // (name, max rel err)
};

/// Compares reverse-mode gradients against central differences, coordinate by
/// coordinate. The probe step per coordinate is step * max(1, |x|);
/// rel_err = |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
///
/// Throws std::invalid_argument when step is outside [1e-6, 1e-3] and
/// NumericError (naming the probe) when the loss is non-finite at a probe
/// point or at the base point.
GradCheckReport check_gradient(const LossBuilder& loss_fn, const ParamMap& params,
                               double step = 1e-5);

}  // namespace hyptax::autodiff
