#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <thread>

#include "atagan/checkpoint.hpp"
#include "atagan/config.hpp"
#include "atagan/errors.hpp"
#include "atagan/gradient_suite.hpp"
#include "atagan/pnm.hpp"
#include "atagan/report.hpp"
#include "atagan/synth.hpp"
#include "atagan/train.hpp"

namespace atagan::cli {

namespace {

namespace fs = std::filesystem;

// Thrown for input problems found after flag parsing; maps to kExitInvalid.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig resolve_config(const std::string& path) {
  if (path.empty()) {
    RunConfig cfg;
    validate(cfg);
    return cfg;
  }
  return load_config(path);
}

void echo_config(const fs::path& out, const RunConfig& cfg) {
  fs::create_directories(out);
  std::ofstream f(out / "config.txt", std::ios::trunc);
  f << "# resolved configuration, hash " << config_hash(cfg) << '\n' << to_text(cfg);
  if (!f) throw std::runtime_error("cannot write " + (out / "config.txt").string());
}

ProgressFn printer(std::ostream& out) {
  return [&out](const std::string& line) { out << line << std::endl; };
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Flags {
  std::string config;
  std::string data;
  std::string out;
  std::string mode;
  std::string teacher;
  std::string baseline;
  std::string ata;
  std::string generator;
  std::string checkpoint;
  std::string split = "val";
  std::string gate = "one";
  std::size_t n = 16;
  std::size_t seeds = kSuiteSeeds;
  std::uint64_t latent_seed = 0;
  bool resume = false;
};

int gen_data(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve_config(f.config);
  echo_config(f.out, cfg);
  const SplitDataset data = generate_dataset(cfg.data, std::max(1u, std::thread::hardware_concurrency()));
  write_dataset(f.out, data);
  out << "wrote " << data.train.size() << " train and " << data.val.size() << " val samples to "
      << f.out << '\n';
  return kExitOk;
}

int train_teacher_cmd(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve_config(f.config);
  cfg.train.mode = RunMode::teacher;
  const SplitDataset data = read_dataset(f.data);
  echo_config(f.out, cfg);
  const TeacherResult r = train_teacher(cfg.train, data.train, data.val, fs::path(f.out),
                                        printer(out));
  char line[128];
  std::snprintf(line, sizeof line, "best val accuracy %.4f at epoch %zu\n", r.best_val_acc,
                r.best_epoch);
  out << line;
  return kExitOk;
}

int train_gan_cmd(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve_config(f.config);
  cfg.train.mode = f.mode == "ata" ? RunMode::gan_ata : RunMode::gan_baseline;
  if (cfg.train.mode == RunMode::gan_ata && f.teacher.empty()) {
    throw InvalidInput("--mode ata requires --teacher");
  }
  std::optional<TeacherParams> teacher;
  if (!f.teacher.empty()) teacher = load_params<TeacherParams>(f.teacher);
  const Dataset train = read_split(f.data, false);
  echo_config(f.out, cfg);
  const GanRunResult r = run_gan(cfg.train, train, teacher, f.out, f.resume, printer(out));
  out << "finished at iteration " << r.final_iteration << '\n';
  return kExitOk;
}

int export_scam_cmd(const Flags& f, std::ostream& out) {
  const Checkpoint ckpt = read_checkpoint(f.checkpoint);
  const Arch arch = parse_arch(ckpt.arch);
  if (arch == Arch::generator) throw InvalidInput("--checkpoint must hold a teacher or discriminator");
  const Dataset data = read_split(f.data, f.split == "val");
  if (f.n == 0 || f.n > data.size()) {
    throw InvalidInput("--n must be in 1.." + std::to_string(data.size()));
  }
  std::vector<std::size_t> idx(f.n);
  for (std::size_t i = 0; i < f.n; ++i) idx[i] = i;
  const Batch b = gather(data, idx);
  const ScamMap map = arch == Arch::teacher
                          ? teacher_attention(TeacherParams::from_named(ckpt.params), b.images)
                          : discriminator_attention(DiscriminatorParams::from_named(ckpt.params),
                                                    b.images, parse_scam_gate(f.gate));
  fs::create_directories(f.out);
  export_grid(b.images, 8, fs::path(f.out) / "images.pgm");
  export_grid(map.values, 8, fs::path(f.out) / "scam.pgm");
  const std::size_t px = kImageSize * kImageSize;
  for (std::size_t i = 0; i < f.n; ++i) {
    Tensor image({1, kImageSize, kImageSize});
    Tensor att({1, kImageSize, kImageSize});
    std::copy_n(b.images.data().begin() + static_cast<std::ptrdiff_t>(i * px), px,
                image.data().begin());
    std::copy_n(map.values.data().begin() + static_cast<std::ptrdiff_t>(i * px), px,
                att.data().begin());
    char name[32];
    std::snprintf(name, sizeof name, "overlay_%04zu.ppm", i);
    export_overlay(image, att, fs::path(f.out) / name);
  }
  out << "exported " << f.n << " " << ckpt.arch << " attention maps to " << f.out << '\n';
  return kExitOk;
}

int eval_cmd(const Flags& f, std::ostream& out) {
  EvalInputs in;
  in.teacher = load_params<TeacherParams>(f.teacher);
  std::uint64_t h = fnv1a_file(f.teacher);
  if (!f.baseline.empty()) {
    in.d_baseline = load_params<DiscriminatorParams>(f.baseline);
    h = fnv1a_file(f.baseline, h);
  }
  if (!f.ata.empty()) {
    in.d_ata = load_params<DiscriminatorParams>(f.ata);
    h = fnv1a_file(f.ata, h);
  }
  if (!f.generator.empty()) {
    in.generator = load_params<GeneratorParams>(f.generator);
    h = fnv1a_file(f.generator, h);
  }
  in.gate = parse_scam_gate(f.gate);
  in.latent_seed = f.latent_seed;
  in.config_hash = hex(h);
  const Dataset data = read_split(f.data, f.split == "val");
  if (f.n == 0 || f.n > data.size()) {
    throw InvalidInput("--n must be in 1.." + std::to_string(data.size()));
  }
  const auto reports = evaluate_run(in, data, f.n);
  write_report(f.out, reports);
  out << format_report_table(reports);
  return kExitOk;
}

int gradcheck_cmd(const Flags& f, std::ostream& out) {
  const GradientSuiteResult r = run_gradient_suite(f.seeds, [&](const GradientCaseResult& c) {
    char line[160];
    std::snprintf(line, sizeof line, "%-4s %-38s max_err %.3e  checked %zu", c.passed ? "ok" : "FAIL",
                  c.name.c_str(), c.max_error, c.checked);
    out << line;
    if (!c.passed) out << "  " << c.worst;
    out << std::endl;
  });
  std::size_t failed = 0;
  for (const auto& c : r.cases) failed += c.passed ? 0 : 1;
  out << r.cases.size() - failed << "/" << r.cases.size() << " gradient checks passed over "
      << f.seeds << " seeds\n";
  return r.passed ? kExitOk : kExitInvalid;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-transfer GAN training on synthetic cell images", "atagan"};
  app.require_subcommand(1);
  Flags f;

  const auto existing_dir = CLI::ExistingDirectory;
  const auto existing_file = CLI::ExistingFile;
  auto config_opt = [&](CLI::App* c) {
    c->add_option("--config", f.config, "key = value run configuration")->check(existing_file);
  };
  auto out_opt = [&](CLI::App* c) {
    c->add_option("--out", f.out, "output directory")->required();
  };
  auto data_opt = [&](CLI::App* c) {
    c->add_option("--data", f.data, "dataset directory written by gen-data")
        ->required()
        ->check(existing_dir);
  };
  const std::vector<std::string> splits{"train", "val"};

  CLI::App* gen = app.add_subcommand("gen-data", "generate the synthetic dataset");
  config_opt(gen);
  out_opt(gen);

  CLI::App* teach = app.add_subcommand("train-teacher", "train the teacher classifier");
  config_opt(teach);
  data_opt(teach);
  out_opt(teach);

  CLI::App* gan = app.add_subcommand("train-gan", "train a GAN with or without attention transfer");
  gan->add_option("--mode", f.mode, "baseline or ata")
      ->required()
      ->check(CLI::IsMember({"baseline", "ata"}));
  config_opt(gan);
  data_opt(gan);
  gan->add_option("--teacher", f.teacher, "teacher checkpoint")->check(existing_file);
  gan->add_flag("--resume", f.resume, "continue from the state saved in --out");
  out_opt(gan);

  CLI::App* exp = app.add_subcommand("export-scam", "export attention grids and overlays");
  exp->add_option("--checkpoint", f.checkpoint, "teacher or discriminator checkpoint")
      ->required()
      ->check(existing_file);
  data_opt(exp);
  exp->add_option("--n", f.n, "number of samples")->required();
  exp->add_option("--split", f.split, "dataset split")->check(CLI::IsMember(splits));
  exp->add_option("--gate", f.gate, "discriminator attention gate")
      ->check(CLI::IsMember({"one", "sigmoid"}));
  out_opt(exp);

  CLI::App* ev = app.add_subcommand("eval-localization", "score attention against cell masks");
  ev->add_option("--teacher", f.teacher, "teacher checkpoint")->required()->check(existing_file);
  ev->add_option("--baseline", f.baseline, "baseline discriminator checkpoint")
      ->check(existing_file);
  ev->add_option("--ata", f.ata, "attention-transfer discriminator checkpoint")
      ->check(existing_file);
  ev->add_option("--generator", f.generator, "generator checkpoint for generated images")
      ->check(existing_file);
  data_opt(ev);
  ev->add_option("--n", f.n, "number of samples")->default_val(200);
  ev->add_option("--split", f.split, "dataset split")->check(CLI::IsMember(splits));
  ev->add_option("--gate", f.gate, "discriminator attention gate")
      ->check(CLI::IsMember({"one", "sigmoid"}));
  ev->add_option("--latent-seed", f.latent_seed, "seed of the generated batch");
  out_opt(ev);

  CLI::App* gc = app.add_subcommand("gradcheck", "run the finite-difference gradient suite");
  gc->add_option("--seeds", f.seeds, "random seeds per check")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "atagan: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (gen->parsed()) return gen_data(f, out);
    if (teach->parsed()) return train_teacher_cmd(f, out);
    if (gan->parsed()) return train_gan_cmd(f, out);
    if (exp->parsed()) return export_scam_cmd(f, out);
    if (ev->parsed()) return eval_cmd(f, out);
    return gradcheck_cmd(f, out);
  } catch (const TrainingAborted& e) {
    err << "atagan: aborted: " << e.what() << '\n';
    return kExitFailed;
  } catch (const InvalidInput& e) {
    err << "atagan: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConfigError& e) {
    err << "atagan: config: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const FormatError& e) {
    err << "atagan: bad input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "atagan: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "atagan: failed: " << e.what() << '\n';
    return kExitFailed;
  }
}

}  // namespace atagan::cli
