// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "hyptax/dataset.hpp"
#include "hyptax/trainer.hpp"

namespace hyptax {

// JSON documents mirror the config field names exactly; unknown keys are
// rejected (DataError), missing keys fall back to the defaults.

std::string train_config_to_json(const train::TrainConfig& cfg);
train::TrainConfig train_config_from_json(const std::string& text);
train::TrainConfig load_train_config(const std::string& path);

std::string synth_spec_to_json(const data::SynthSpec& spec);
data::SynthSpec synth_spec_from_json(const std::string& text);
data::SynthSpec load_synth_spec(const std::string& path);

}  // namespace hyptax
