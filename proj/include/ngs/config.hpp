#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ngs/dataset.hpp"
#include "ngs/harness.hpp"
#include "ngs/learning.hpp"

namespace ngs {

// Config files are `key = value` lines; `#` starts a comment. Unknown keys and
// malformed values throw std::invalid_argument naming the line.

/// Keys: method, batch_size, iterations, learning_rate, steps, lambda, beta,
/// baseline_decay, data_fraction, pretrain_size, pretrain_steps, mapo_clip,
/// arch, input_dim, hidden, init_scale, seed, eval_every, checkpoint_every,
/// record_time, execution.
TrainConfig parse_train_config(std::string_view text);
/// Canonical text; parse_train_config(to_text(c)) reproduces c.
std::string to_text(const TrainConfig& c);

/// Keys: mix (`len:train:test, ...`), feature_dim, noise, pool_size, seed, scale.
DatasetSpec parse_dataset_spec(std::string_view text);
std::string to_text(const DatasetSpec& s);

/// Global keys data, out and eval_every, then one `[run NAME]` section per run
/// holding train keys and an optional per-run `data`. Relative paths resolve
/// against `base`. Runs inherit the global eval_every unless they set it.
ExperimentPlan parse_plan(std::string_view text, const std::filesystem::path& base = {});

std::string read_text_file(const std::filesystem::path& path);

}  // namespace ngs
