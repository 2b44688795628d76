#include "atagan/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "atagan/checkpoint.hpp"
#include "atagan/errors.hpp"
#include "atagan/losses.hpp"
#include "atagan/ops.hpp"
#include "atagan/pnm.hpp"
#include "atagan/scam.hpp"

namespace atagan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool all_finite(const Tensor& t) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}
constexpr std::size_t kPreviewCount = 16;
constexpr const char* kStateMagic = "ATAGAN-TRAINER1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t count_correct(const Tensor& logits, std::span<const int> labels) {
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  auto d = logits.data();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = d.data() + i * c;
    const auto best = static_cast<int>(std::max_element(row, row + c) - row);
    hits += best == labels[i] ? 1 : 0;
  }
  return hits;
}

ScamMap teacher_map(const TeacherParams& teacher, const Tensor& images) {
  TeacherOutput t = teacher_forward(teacher, images);
  return align_and_normalize(soft_cam(t.feature_maps, teacher.head_w, t.logits));
}

ScamMap discriminator_map(const DiscriminatorOutput& out, const Tensor& head_w, ScamGate gate) {
  return align_and_normalize(discriminator_scam(out.feature_maps, head_w, gate, out.logit));
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

// ---------------------------------------------------------------- teacher --

ClassifierEval evaluate_teacher(const TeacherParams& teacher, const Dataset& data,
                                std::size_t chunk) {
  if (data.size() == 0) throw std::invalid_argument("evaluate_teacher: empty dataset");
  const TeacherParams frozen = detached(teacher);
  double loss_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t b = 0; b < data.size(); b += chunk) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(data.size(), b + chunk); ++i) idx.push_back(i);
    Batch batch = gather(data, idx);
    Tensor logits = teacher_forward(frozen, batch.images).logits;
    loss_sum += cross_entropy(logits, batch.labels).item() * static_cast<double>(idx.size());
    hits += count_correct(logits, batch.labels);
  }
  const double n = static_cast<double>(data.size());
  return {loss_sum / n, static_cast<double>(hits) / n};
}

TeacherResult train_teacher(const TrainConfig& cfg, const Dataset& train, const Dataset& val,
                            const std::optional<std::filesystem::path>& out_dir,
                            const ProgressFn& progress) {
  if (train.size() < cfg.batch_size) {
    throw std::invalid_argument("train_teacher: " + std::to_string(train.size()) +
                                " training samples cannot fill one batch of " +
                                std::to_string(cfg.batch_size));
  }
  if (val.size() == 0) throw std::invalid_argument("train_teacher: empty validation set");
  TeacherParams params = TeacherParams::init(seeds::teacher_init(cfg.seed));
  set_requires_grad(params, true);
  const std::vector<Tensor> tensors = tensors_of(params);
  AdamState adam = AdamState::for_params(tensors);
  const AdamOptions opts = cfg.adam(cfg.lr_teacher);
  BatchStream stream(train, cfg.batch_size, seeds::shuffle(cfg.seed));

  std::ofstream csv;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    csv.open(*out_dir / "teacher_metrics.csv");
    if (!csv) throw std::runtime_error("cannot write teacher metrics in " + out_dir->string());
    csv << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  }

  TeacherResult result;
  result.best_val_acc = -1.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t hits = 0, seen = 0;
    for (std::size_t b = 0; b < stream.batches_per_epoch(); ++b) {
      Batch batch = stream.next();
      Tensor logits = teacher_forward(params, batch.images).logits;
      Tensor loss = cross_entropy(logits, batch.labels);
      if (!std::isfinite(loss.item())) {
        throw TrainingAborted("teacher loss became non-finite in epoch " + std::to_string(epoch));
      }
      loss.backward();
      adam_step(tensors, adam, opts);
      for (Tensor t : tensors) t.zero_grad();
      loss_sum += loss.item() * static_cast<double>(batch.labels.size());
      hits += count_correct(logits, batch.labels);
      seen += batch.labels.size();
    }
    TeacherEpoch e;
    e.epoch = epoch;
    e.train_loss = loss_sum / static_cast<double>(seen);
    e.train_acc = static_cast<double>(hits) / static_cast<double>(seen);
    const ClassifierEval v = evaluate_teacher(params, val);
    e.val_loss = v.loss;
    e.val_acc = v.accuracy;
    result.history.push_back(e);
    if (e.val_acc > result.best_val_acc) {
      result.best_val_acc = e.val_acc;
      result.best_epoch = epoch;
      result.best = detached(params);
      if (out_dir) save_params(*out_dir / "teacher.ckpt", result.best);
    }
    if (csv) {
      csv << epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.train_acc) << ','
          << fmt(e.val_loss) << ',' << fmt(e.val_acc) << '\n'
          << std::flush;
    }
    if (progress) {
      char line[160];
      std::snprintf(line, sizeof line,
                    "epoch %zu  train loss %.4f acc %.4f  val loss %.4f acc %.4f", epoch,
                    e.train_loss, e.train_acc, e.val_loss, e.val_acc);
      progress(line);
    }
  }
  if (cfg.epochs == 0) result.best = detached(params);
  return result;
}

// -------------------------------------------------------------------- GAN --

bool LossBundle::has_scam() const { return !std::isnan(l_scam_total); }

std::string metrics_row(std::size_t iter, const LossBundle& b) {
  auto opt = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
  return std::to_string(iter) + ',' + fmt(b.d_adv_real) + ',' + fmt(b.d_adv_fake) + ',' +
         opt(b.l_scam_real) + ',' + opt(b.l_scam_fake) + ',' + opt(b.l_scam_total) + ',' +
         fmt(b.d_total) + ',' + fmt(b.g_loss);
}

GanTrainer::GanTrainer(const TrainConfig& cfg, const Dataset& train,
                       std::optional<TeacherParams> teacher)
    : cfg_(cfg),
      train_(&train),
      teacher_(std::move(teacher)),
      g_(GeneratorParams::init(seeds::generator_init(cfg.seed))),
      d_(DiscriminatorParams::init(seeds::discriminator_init(cfg.seed))),
      stream_(train, cfg.batch_size, seeds::shuffle(cfg.seed)),
      rng_(seeds::latents(cfg.seed)) {
  if (cfg.mode == RunMode::teacher) {
    throw ConfigError("GanTrainer needs mode gan-baseline or gan-ata");
  }
  if (cfg.mode == RunMode::gan_ata && !teacher_) {
    throw ConfigError("gan-ata mode requires a teacher checkpoint (--teacher)");
  }
  if (teacher_) teacher_ = detached(*teacher_);
  set_requires_grad(g_, true);
  set_requires_grad(d_, true);
  adam_g_ = AdamState::for_params(tensors_of(g_));
  adam_d_ = AdamState::for_params(tensors_of(d_));
}

Tensor GanTrainer::draw_latents(std::size_t n) {
  Tensor z = Tensor::zeros({n, kLatentDim});
  for (double& v : z.data()) v = rng_.normal();
  return z;
}

Tensor GanTrainer::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  Tensor z = Tensor::zeros({n, kLatentDim});
  for (double& v : z.data()) v = rng.normal();
  return generator_forward(detached(g_), z);
}

GanTrainer::DStep GanTrainer::discriminator_step(const Tensor& real, const Tensor& fake) {
  const Tensor fake_in = fake.detach();
  DiscriminatorOutput out_real = discriminator_forward(d_, real);
  DiscriminatorOutput out_fake = discriminator_forward(d_, fake_in);
  if (!all_finite(out_real.decision) || !all_finite(out_fake.decision)) {
    abort_non_finite("discriminator output", real, fake_in);
  }

  Tensor scam_real, scam_fake;
  double diag_real = kNaN, diag_fake = kNaN;
  if (teacher_) {
    const ScamMap t_real = teacher_map(*teacher_, real);
    const ScamMap t_fake = teacher_map(*teacher_, fake_in);
    if (cfg_.mode == RunMode::gan_ata) {
      scam_real = scam_loss(t_real, discriminator_map(out_real, d_.head_w, cfg_.disc_scam_gate));
      scam_fake = scam_loss(t_fake, discriminator_map(out_fake, d_.head_w, cfg_.disc_scam_gate));
      diag_real = scam_real.item();
      diag_fake = scam_fake.item();
    } else {
      const Tensor w = d_.head_w.detach();
      auto frozen = [](const DiscriminatorOutput& o) {
        return DiscriminatorOutput{o.decision.detach(), o.logit.detach(),
                                   o.feature_maps.detach()};
      };
      diag_real = scam_loss(t_real, discriminator_map(frozen(out_real), w, cfg_.disc_scam_gate))
                      .item();
      diag_fake = scam_loss(t_fake, discriminator_map(frozen(out_fake), w, cfg_.disc_scam_gate))
                      .item();
    }
    scam_evaluations_ += 2;
  }

  DiscriminatorLoss loss = discriminator_objective(out_real.decision, out_fake.decision,
                                                   scam_real, scam_fake, cfg_.lambda_scam);
  DStep s{loss.adv_real.item(), loss.adv_fake.item(), diag_real, diag_fake,
          teacher_ ? diag_real + diag_fake : kNaN, loss.total.item()};
  if (!std::isfinite(s.d_total) || (teacher_ && !std::isfinite(s.l_scam_total))) {
    abort_non_finite("discriminator loss", real, fake_in);
  }
  if (loss.scam_total.defined()) s.l_scam_total = loss.scam_total.item();
  loss.total.backward();
  const std::vector<Tensor> params = tensors_of(d_);
  adam_step(params, adam_d_, cfg_.adam(cfg_.lr_d));
  for (Tensor t : params) t.clear_grad();
  return s;
}

double GanTrainer::generator_step() {
  Tensor z = draw_latents(cfg_.batch_size);
  Tensor fake = generator_forward(g_, z);
  const DiscriminatorParams frozen = detached(d_);
  const Tensor decision = discriminator_forward(frozen, fake).decision;
  if (!all_finite(decision)) abort_non_finite("discriminator output", Tensor(), fake.detach());
  Tensor loss = generator_objective(decision, cfg_.g_loss);
  const double value = loss.item();
  if (!std::isfinite(value)) abort_non_finite("generator loss", Tensor(), fake.detach());
  loss.backward();
  const std::vector<Tensor> params = tensors_of(g_);
  adam_step(params, adam_g_, cfg_.adam(cfg_.lr_g));
  for (Tensor t : params) t.clear_grad();
  return value;
}

LossBundle GanTrainer::step() {
  DStep last{};
  for (std::size_t k = 0; k < cfg_.d_steps_per_g; ++k) {
    Batch real = stream_.next();
    Tensor z = draw_latents(real.labels.size());
    Tensor fake = generator_forward(detached(g_), z);
    last = discriminator_step(real.images, fake);
  }
  LossBundle b;
  b.d_adv_real = last.d_adv_real;
  b.d_adv_fake = last.d_adv_fake;
  b.l_scam_real = last.l_scam_real;
  b.l_scam_fake = last.l_scam_fake;
  b.l_scam_total = last.l_scam_total;
  b.d_total = last.d_total;
  b.g_loss = generator_step();
  ++iteration_;
  return b;
}

void GanTrainer::abort_non_finite(const std::string& what, const Tensor& real,
                                  const Tensor& fake) {
  std::string msg = what + " is not finite at iteration " + std::to_string(iteration_ + 1);
  if (dump_dir_) {
    try {
      std::filesystem::create_directories(*dump_dir_);
      auto dump = [&](const Tensor& images, const char* name) {
        Tensor clean = images.clone();
        for (double& v : clean.data()) v = std::isfinite(v) ? v : 0.0;
        write_pgm(*dump_dir_ / name, tile(clean, 8));
      };
      if (real.defined()) dump(real, "dump_real.pgm");
      if (fake.defined()) dump(fake, "dump_fake.pgm");
      std::ofstream info(*dump_dir_ / "dump.txt");
      info << msg << '\n';
      msg += " (batch dumped to " + dump_dir_->string() + ")";
    } catch (const std::exception& e) {
      msg += std::string(" (dump failed: ") + e.what() + ")";
    }
  }
  throw TrainingAborted(msg);
}

void GanTrainer::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_params(dir / "generator.ckpt", g_, &adam_g_);
  save_params(dir / "discriminator.ckpt", d_, &adam_d_);
  std::ostringstream s;
  s << kStateMagic << '\n' << "iteration " << iteration_ << '\n';
  s << "scam_evaluations " << scam_evaluations_ << '\n';
  const auto st = rng_.state();
  s << "rng " << st[0] << ' ' << st[1] << ' ' << st[2] << ' ' << st[3] << ' '
    << (rng_.has_spare() ? 1 : 0) << ' ' << std::bit_cast<std::uint64_t>(rng_.spare()) << '\n';
  s << "batch " << stream_.position().epoch << ' ' << stream_.position().batch << '\n';
  write_text_atomic(dir / "trainer.state", s.str());
}

void GanTrainer::load(const std::filesystem::path& dir) {
  const auto state_path = dir / "trainer.state";
  std::ifstream in(state_path);
  if (!in) throw std::runtime_error("cannot open " + state_path.string());
  auto bad = [&](const char* why) {
    return FormatError(state_path.string() + ": " + why);
  };
  std::string magic, key;
  std::size_t iteration = 0, evals = 0;
  Rng::State st{};
  int has_spare = 0;
  std::uint64_t spare_bits = 0;
  BatchStream::Position pos;
  if (!(in >> magic) || magic != kStateMagic) throw bad("bad magic");
  if (!(in >> key >> iteration) || key != "iteration") throw bad("missing iteration");
  if (!(in >> key >> evals) || key != "scam_evaluations") throw bad("missing scam_evaluations");
  if (!(in >> key >> st[0] >> st[1] >> st[2] >> st[3] >> has_spare >> spare_bits) ||
      key != "rng") {
    throw bad("missing rng state");
  }
  if (!(in >> key >> pos.epoch >> pos.batch) || key != "batch") throw bad("missing batch");
  if (in >> key) throw bad("trailing content");

  AdamState ag, ad;
  GeneratorParams g = load_params<GeneratorParams>(dir / "generator.ckpt", &ag);
  DiscriminatorParams d = load_params<DiscriminatorParams>(dir / "discriminator.ckpt", &ad);
  stream_.seek(pos);
  set_requires_grad(g, true);
  set_requires_grad(d, true);
  g_ = g;
  d_ = d;
  adam_g_ = std::move(ag);
  adam_d_ = std::move(ad);
  rng_.restore(st, has_spare != 0, std::bit_cast<double>(spare_bits));
  iteration_ = iteration;
  scam_evaluations_ = evals;
}

GanRunResult run_gan(const TrainConfig& cfg, const Dataset& train,
                     const std::optional<TeacherParams>& teacher,
                     const std::filesystem::path& out_dir, bool resume,
                     const ProgressFn& progress) {
  std::filesystem::create_directories(out_dir);
  GanTrainer trainer(cfg, train, teacher);
  trainer.set_dump_dir(out_dir / "dump");
  const auto metrics_path = out_dir / cfg.metrics_file;

  std::vector<std::string> kept;
  if (resume) {
    trainer.load(out_dir);
    std::ifstream old(metrics_path);
    if (!old) throw std::runtime_error("cannot resume: missing " + metrics_path.string());
    std::string line;
    std::getline(old, line);
    if (line != kMetricsHeader) throw FormatError(metrics_path.string() + ": bad header");
    while (kept.size() < trainer.iteration() && std::getline(old, line)) kept.push_back(line);
    if (kept.size() != trainer.iteration()) {
      throw FormatError(metrics_path.string() + ": fewer rows than the saved iteration");
    }
  }
  std::ofstream csv(metrics_path, std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + metrics_path.string());
  csv << kMetricsHeader << '\n';
  for (const auto& l : kept) csv << l << '\n';

  GanRunResult result;
  while (trainer.iteration() < cfg.iterations) {
    const LossBundle b = trainer.step();
    const std::size_t it = trainer.iteration();
    csv << metrics_row(it, b) << '\n';
    result.history.push_back(b);
    if (cfg.sample_every > 0 && it % cfg.sample_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "samples_%06zu.pgm", it);
      write_pgm(out_dir / name,
                tile(trainer.sample(kPreviewCount, seeds::preview(cfg.seed)), 4));
    }
    if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0 && it < cfg.iterations) {
      csv.flush();
      trainer.save(out_dir);
    }
    if (progress && (it % 100 == 0 || it == cfg.iterations)) {
      char line[200];
      std::snprintf(line, sizeof line, "iter %zu  d_total %.4f  g_loss %.4f  l_scam_total %s",
                    it, b.d_total, b.g_loss,
                    b.has_scam() ? fmt(b.l_scam_total).substr(0, 8).c_str() : "-");
      progress(line);
    }
  }
  csv.flush();
  if (!csv) throw std::runtime_error("write failed: " + metrics_path.string());
  trainer.save(out_dir);
  write_pgm(out_dir / "samples_final.pgm",
            tile(trainer.sample(kPreviewCount, seeds::preview(cfg.seed)), 4));
  result.final_iteration = trainer.iteration();
  return result;
}

}  // namespace atagan
