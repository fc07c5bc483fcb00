// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hyptax {

/// Malformed or inconsistent input data (files, configs, label tables).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure: non-finite loss, failed gradient check, bad probe.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hyptax
