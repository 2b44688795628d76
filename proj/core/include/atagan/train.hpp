#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atagan/adam.hpp"
#include "atagan/config.hpp"
#include "atagan/models.hpp"
#include "atagan/rng.hpp"
#include "atagan/synth.hpp"

namespace atagan {

/// A loss became NaN or infinite; a diagnostic dump was written if possible.
class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Progress sink for long loops; receives one human-readable line.
using ProgressFn = std::function<void(const std::string&)>;

// ---------------------------------------------------------------- teacher --

struct TeacherEpoch {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double train_acc = 0;
  double val_loss = 0;
  double val_acc = 0;
};

struct TeacherResult {
  TeacherParams best;      // parameters of the best validation epoch
  std::size_t best_epoch = 0;
  double best_val_acc = 0;
  std::vector<TeacherEpoch> history;
};

struct ClassifierEval {
  double loss = 0;
  double accuracy = 0;
};

ClassifierEval evaluate_teacher(const TeacherParams& teacher, const Dataset& data,
                                std::size_t chunk = 100);

/// Cross-entropy training with Adam(lr_teacher). When `out_dir` is given,
/// writes teacher_metrics.csv and teacher.ckpt (best validation accuracy,
/// earliest epoch on ties). Throws std::invalid_argument when the training
/// set cannot fill one batch.
TeacherResult train_teacher(const TrainConfig& cfg, const Dataset& train, const Dataset& val,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                            const ProgressFn& progress = {});

// -------------------------------------------------------------------- GAN --

/// Scalars of one iteration. The l_scam_* fields are NaN when no teacher is
/// available.
struct LossBundle {
  double d_adv_real = 0;
  double d_adv_fake = 0;
  double l_scam_real = 0;
  double l_scam_fake = 0;
  double l_scam_total = 0;
  double d_total = 0;
  double g_loss = 0;

  bool has_scam() const;
};

inline constexpr const char* kMetricsHeader =
    "iter,d_adv_real,d_adv_fake,l_scam_real,l_scam_fake,l_scam_total,d_total,g_loss";

/// One CSV row; doubles use %.17g and NaN attention fields are left empty.
std::string metrics_row(std::size_t iter, const LossBundle& b);

/// Alternating minmax training. Each iteration runs d_steps_per_g
/// discriminator steps (real batch plus a detached generated batch) and one
/// generator step on fresh latents.
///
/// In gan-ata mode the teacher's Soft-CAMs of both batches supervise the
/// discriminator's and lambda_scam times their sum joins the discriminator
/// loss. In gan-baseline mode a teacher is optional; if present the same
/// attention losses are computed on detached values and only logged.
class GanTrainer {
 public:
  GanTrainer(const TrainConfig& cfg, const Dataset& train,
             std::optional<TeacherParams> teacher = std::nullopt);

  /// One full iteration; returns the losses of its last D step and its G step.
  LossBundle step();

  struct DStep {
    double d_adv_real, d_adv_fake, l_scam_real, l_scam_fake, l_scam_total, d_total;
  };
  /// One discriminator update on explicit batches (fake images are used as
  /// given, without gradient). Does not advance the iteration counter.
  DStep discriminator_step(const Tensor& real, const Tensor& fake);
  /// One generator update on fresh latents; returns the generator loss.
  double generator_step();

  /// Generator output for `n` latents drawn from a fresh Rng(seed); no graph.
  Tensor sample(std::size_t n, std::uint64_t seed) const;

  std::size_t iteration() const { return iteration_; }
  std::size_t scam_evaluations() const { return scam_evaluations_; }
  const GeneratorParams& generator() const { return g_; }
  const DiscriminatorParams& discriminator() const { return d_; }
  const std::optional<TeacherParams>& teacher() const { return teacher_; }
  const TrainConfig& config() const { return cfg_; }

  /// generator.ckpt and discriminator.ckpt (with optimizer sections) plus
  /// trainer.state (iteration, RNG and batch position).
  void save(const std::filesystem::path& dir) const;
  /// Restores a state written by save(); the trainer must have been built
  /// with the same configuration and data.
  void load(const std::filesystem::path& dir);

  /// Where the last batch is written if a loss turns non-finite.
  void set_dump_dir(std::filesystem::path dir) { dump_dir_ = std::move(dir); }

 private:
  Tensor draw_latents(std::size_t n);
  [[noreturn]] void abort_non_finite(const std::string& what, const Tensor& real,
                                     const Tensor& fake);

  TrainConfig cfg_;
  const Dataset* train_;
  std::optional<TeacherParams> teacher_;
  GeneratorParams g_;
  DiscriminatorParams d_;
  AdamState adam_g_;
  AdamState adam_d_;
  BatchStream stream_;
  Rng rng_;
  std::size_t iteration_ = 0;
  std::size_t scam_evaluations_ = 0;
  std::optional<std::filesystem::path> dump_dir_;
};

struct GanRunResult {
  std::vector<LossBundle> history;  // iterations run by this call
  std::size_t final_iteration = 0;
};

/// Drives a GanTrainer for cfg.iterations, writing under `out_dir`: the
/// metrics CSV, periodic sample grids (samples_NNNNNN.pgm), checkpoints and
/// dumps. With `resume` the trainer state in `out_dir` is restored and the
/// metrics file is cut back to the restored iteration before appending.
GanRunResult run_gan(const TrainConfig& cfg, const Dataset& train,
                     const std::optional<TeacherParams>& teacher,
                     const std::filesystem::path& out_dir, bool resume = false,
                     const ProgressFn& progress = {});

/// Stream seeds used by the trainer, derived from cfg.seed.
namespace seeds {
inline std::uint64_t generator_init(std::uint64_t s) { return derive_seed(s, 0); }
inline std::uint64_t discriminator_init(std::uint64_t s) { return derive_seed(s, 1); }
inline std::uint64_t latents(std::uint64_t s) { return derive_seed(s, 2); }
inline std::uint64_t shuffle(std::uint64_t s) { return derive_seed(s, 3); }
inline std::uint64_t preview(std::uint64_t s) { return derive_seed(s, 4); }
inline std::uint64_t teacher_init(std::uint64_t s) { return derive_seed(s, 5); }
}  // namespace seeds

}  // namespace atagan
