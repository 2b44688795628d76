#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "atagan/adam.hpp"
#include "atagan/losses.hpp"
#include "atagan/scam.hpp"
#include "atagan/synth.hpp"

namespace atagan {

enum class RunMode { teacher, gan_baseline, gan_ata };

std::string_view to_string(RunMode m);
RunMode parse_run_mode(std::string_view s);

struct TrainConfig {
  RunMode mode = RunMode::gan_ata;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr_teacher = 1e-3;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda_scam = 1.0;
  std::uint64_t seed = 1;
  ScamGate disc_scam_gate = ScamGate::one;
  GeneratorLoss g_loss = GeneratorLoss::non_saturating;
  std::size_t iterations = 8000;
  std::size_t d_steps_per_g = 1;
  std::size_t sample_every = 1000;      // 0 disables periodic grids
  std::size_t checkpoint_every = 1000;  // 0 writes checkpoints only at the end
  std::string metrics_file = "metrics.csv";

  AdamOptions adam(double lr) const { return {lr, beta1, beta2, adam_eps}; }
};

/// Every tunable of a run, read from a `key = value` file. Blank lines and
/// text after '#' are ignored; unknown or repeated keys are rejected.
struct RunConfig {
  TrainConfig train;
  DatasetSpec data;
};

/// Throws ConfigError naming the line on any problem.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Checks ranges (rates > 0, lambda >= 0, ...); throws ConfigError.
void validate(const RunConfig& cfg);

/// Canonical text of every key, parseable by parse_config; doubles are
/// printed with 17 significant digits so they round-trip.
std::string to_text(const RunConfig& cfg);
/// FNV-1a 64 of to_text(cfg), as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace atagan
