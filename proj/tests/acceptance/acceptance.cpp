// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Artifacts stay under --work.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "atagan/checkpoint.hpp"
#include "atagan/gradient_suite.hpp"
#include "atagan/models.hpp"
#include "atagan/pnm.hpp"
#include "atagan/report.hpp"
#include "atagan/scam.hpp"
#include "atagan/synth.hpp"
#include "atagan/train.hpp"
#include "cli.hpp"
#include "../support/oracles.hpp"

namespace fs = std::filesystem;
using namespace atagan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void log(const std::string& line) { std::cerr << "[acceptance] " << line << std::endl; }

int cli_run(std::vector<std::string> args) {
  std::string joined = "atagan";
  for (const auto& a : args) joined += " " + a;
  log(joined);
  return cli::run(args, std::cerr, std::cerr);
}

// Column of a CSV file with a header row; empty cells become NaN.
std::map<std::string, std::vector<double>> read_csv_columns(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> names;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) names.push_back(cell);
  }
  std::map<std::string, std::vector<double>> cols;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream r(line);
    std::string cell;
    for (const auto& name : names) {
      std::getline(r, cell, ',');
      cols[name].push_back(cell.empty() ? std::nan("") : std::stod(cell));
    }
  }
  return cols;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

class Acceptance {
 public:
  explicit Acceptance(fs::path work) : work_(std::move(work)) {}

  // ---------------------------------------------------------------- criteria

  Outcome gradient_suite() {
    const auto t0 = Clock::now();
    const GradientSuiteResult r = run_gradient_suite(kSuiteSeeds, [](const GradientCaseResult& c) {
      if (!c.passed) log("gradient case " + c.name + " failed: " + c.worst);
    });
    const double sec = seconds_since(t0);
    double worst = 0;
    std::size_t failed = 0;
    std::string worst_name;
    for (const auto& c : r.cases) {
      failed += c.passed ? 0 : 1;
      if (c.max_error >= worst) {
        worst = c.max_error;
        worst_name = c.name;
      }
    }
    return {r.passed && sec < 120.0,
            fmt("%zu/%zu ops and model losses x %zu seeds within rel tol %.0e (eps %.0e), worst "
                "%.2e in %s; %.1f s (limit 120 s)",
                r.cases.size() - failed, r.cases.size(), kSuiteSeeds, kSuiteTol, kSuiteEps, worst,
                worst_name.c_str(), sec)};
  }

  Outcome soft_cam_oracle() {
    const auto t0 = Clock::now();
    constexpr std::size_t kInstances = 60;
    double max_soft = 0, max_hard = 0, max_violation = 0;
    for (std::uint64_t s = 1; s <= kInstances; ++s) {
      Rng shape_rng(derive_seed(0x5ca3, s));
      const std::size_t n = 1 + shape_rng.next_u64() % 4, k = 1 + shape_rng.next_u64() % 16,
                        c = 1 + shape_rng.next_u64() % 6, h = 1 + shape_rng.next_u64() % 8,
                        w = 1 + shape_rng.next_u64() % 8;
      const double logit_scale = shape_rng.uniform(0.1, 8.0);
      const Tensor fm = testing::random_tensor({n, k, h, w}, derive_seed(s, 1), 0.0, 3.0);
      const Tensor wt = testing::random_tensor({k, c}, derive_seed(s, 2));
      const Tensor logits =
          testing::random_tensor({n, c}, derive_seed(s, 3), -logit_scale, logit_scale);

      const ScamMap sc = soft_cam(fm, wt, logits);
      const auto expected = testing::naive_soft_cam(fm, wt, testing::naive_softmax_rows(logits));
      max_soft = std::max(max_soft, testing::max_abs_diff(sc.values.data(), expected));

      // Per-class CAMs by direct loops bound the Soft-CAM from both sides.
      const std::size_t hw = h * w;
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t p = 0; p < hw; ++p) {
          double lo = INFINITY, hi = -INFINITY;
          for (std::size_t j = 0; j < c; ++j) {
            double cam = 0;
            for (std::size_t i = 0; i < k; ++i) cam += fm.at((b * k + i) * hw + p) * wt.at(i * c + j);
            lo = std::min(lo, cam);
            hi = std::max(hi, cam);
          }
          const double v = sc.values.at(b * hw + p);
          max_violation = std::max({max_violation, lo - v, v - hi});
        }

      // A dominant logit collapses the softmax onto one class.
      const std::size_t cls = s % c;
      Tensor onehot({n, c}, 0.0);
      for (std::size_t b = 0; b < n; ++b) onehot.data()[b * c + cls] = 60.0;
      const ScamMap collapsed = soft_cam(fm, wt, onehot);
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t p = 0; p < hw; ++p) {
          double cam = 0;
          for (std::size_t i = 0; i < k; ++i) cam += fm.at((b * k + i) * hw + p) * wt.at(i * c + cls);
          max_hard = std::max(max_hard, std::abs(collapsed.values.at(b * hw + p) - cam));
        }
    }
    const double sec = seconds_since(t0);
    const bool ok = max_soft <= 1e-12 && max_hard <= 1e-9 && max_violation <= 1e-12 && sec < 30;
    return {ok, fmt("%zu instances: max |vectorized - loop| %.2e (tol 1e-12), one-hot vs hard CAM "
                    "%.2e (tol 1e-9), convex bound violation %.2e; %.2f s (limit 30 s)",
                    kInstances, max_soft, max_hard, std::max(0.0, max_violation), sec)};
  }

  Outcome teacher_accuracy() {
    const auto t0 = Clock::now();
    if (cli_run({"gen-data", "--out", data_dir().string()}) != 0) return {false, "gen-data failed"};
    const double gen_sec = seconds_since(t0);
    const auto t1 = Clock::now();
    if (cli_run({"train-teacher", "--data", data_dir().string(), "--out", teacher_dir().string()}) != 0) {
      return {false, "train-teacher failed"};
    }
    const double sec = seconds_since(t1);
    const auto cols = read_csv_columns(teacher_dir() / "teacher_metrics.csv");
    const auto& acc = cols.at("val_acc");
    const auto best = std::max_element(acc.begin(), acc.end());
    const std::size_t epoch = std::size_t(best - acc.begin()) + 1;
    const SplitDataset data = read_dataset(data_dir());
    return {*best >= 0.90 && acc.size() <= 30 && sec < 900,
            fmt("synthetic 4-class data %zu train / %zu val (seed 7): best val accuracy %.4f at "
                "epoch %zu of %zu (need >= 0.90 within 30); data %.1f s, training %.1f s (limit "
                "900 s)",
                data.train.size(), data.val.size(), *best, epoch, acc.size(), gen_sec, sec)};
  }

  Outcome teacher_localization() {
    if (!fs::exists(teacher_ckpt())) return {false, "teacher checkpoint unavailable"};
    EvalInputs in{load_params<TeacherParams>(teacher_ckpt())};
    const auto r = evaluate_run(in, val(), 200).at(0);
    const double ratio = r.mean_ratio / r.mean_mask_fraction;
    return {r.n_samples == 200 && ratio >= 1.5,
            fmt("teacher attention mass in mask %.4f vs mask-area fraction %.4f over %zu val "
                "samples: %.2fx (need >= 1.5x); pointing-game hit rate %.3f",
                r.mean_ratio, r.mean_mask_fraction, r.n_samples, ratio, r.hit_rate)};
  }

  Outcome attention_overfit() {
    if (!fs::exists(teacher_ckpt())) return {false, "teacher checkpoint unavailable"};
    // Start from the discriminator of the 500-iteration baseline run, which
    // was trained adversarially without attention supervision.
    const fs::path start = work_ / "ablation_baseline";
    if (!fs::exists(start / "trainer.state")) {
      train_gan("baseline", write_config("ablation.cfg", gan_config(kAblationSeed, 500, 0.0)),
                start);
    }
    TrainConfig cfg = gan_config(kAblationSeed, 500, kHeadlineLambda);
    cfg.mode = RunMode::gan_ata;
    const Dataset train = read_split(data_dir(), false);
    GanTrainer trainer(cfg, train, load_params<TeacherParams>(teacher_ckpt()));
    trainer.load(start);
    std::vector<std::size_t> idx(cfg.batch_size);
    std::iota(idx.begin(), idx.end(), 0);
    const Tensor real = gather(train, idx).images;
    const Tensor fake = trainer.sample(cfg.batch_size, 2024);
    std::vector<std::vector<double>> g_before;
    for (const auto& e : trainer.generator().named()) {
      g_before.emplace_back(e.value.data().begin(), e.value.data().end());
    }
    std::vector<double> losses;
    for (int i = 0; i < 100; ++i) losses.push_back(trainer.discriminator_step(real, fake).l_scam_total);
    // A final D-only step reports the loss after the 100th update.
    const double after = trainer.discriminator_step(real, fake).l_scam_total;
    bool g_frozen = true;
    const auto g_after = trainer.generator().named();
    for (std::size_t i = 0; i < g_before.size(); ++i) {
      g_frozen = g_frozen && std::ranges::equal(g_before[i], g_after[i].value.data());
    }
    const double reduction = 1.0 - after / losses.front();
    return {g_frozen && reduction >= 0.5,
            fmt("baseline D after 500 iterations, fixed batch of %zu, frozen generator, 100 D-only "
                "ata steps (lambda_scam %g): L_SCAM_total %.4f -> %.4f, reduction %.1f%% (need "
                ">= 50%%); generator %s",
                cfg.batch_size, cfg.lambda_scam, losses.front(), after, 100 * reduction,
                g_frozen ? "unchanged" : "CHANGED")};
  }

  Outcome ablation_identity() {
    if (!fs::exists(teacher_ckpt())) return {false, "teacher checkpoint unavailable"};
    const auto t0 = Clock::now();
    const fs::path cfg = write_config("ablation.cfg", gan_config(kAblationSeed, 500, 0.0));
    const int rb = train_gan("baseline", cfg, work_ / "ablation_baseline");
    const int ra = train_gan("ata", cfg, work_ / "ablation_ata");
    const double sec = seconds_since(t0);
    if (rb != 0 || ra != 0) return {false, "train-gan failed"};
    const std::string b = slurp(work_ / "ablation_baseline" / "metrics.csv");
    const std::string a = slurp(work_ / "ablation_ata" / "metrics.csv");
    const std::size_t rows = std::size_t(std::count(b.begin(), b.end(), '\n')) - 1;
    return {a == b && rows == 500 && sec < 600,
            fmt("--mode ata with lambda_scam=0 vs --mode baseline, seed %d, %zu iterations: "
                "metrics CSV %s (%zu bytes each, fnv %016llx); %.1f s (limit 600 s)",
                int(kAblationSeed), rows, a == b ? "bit-identical" : "DIFFERS", b.size(),
                (unsigned long long)fnv1a_bytes(b), sec)};
  }

  Outcome determinism() {
    if (!fs::exists(teacher_ckpt())) return {false, "teacher checkpoint unavailable"};
    std::vector<std::string> problems;
    std::size_t compared = 0;
    auto same = [&](const fs::path& x, const fs::path& y) {
      ++compared;
      if (!fs::exists(x) || !fs::exists(y) || slurp(x) != slurp(y)) {
        problems.push_back(x.filename().string() + " (" + x.parent_path().filename().string() + ")");
      }
    };

    const fs::path data2 = work_ / "data_again";
    cli_run({"gen-data", "--out", data2.string()});
    same(data_dir() / "train.manifest", data2 / "train.manifest");
    same(data_dir() / "val.manifest", data2 / "val.manifest");
    same(data_dir() / "val" / "00123_image.pgm", data2 / "val" / "00123_image.pgm");

    const fs::path teacher2 = work_ / "teacher_again";
    cli_run({"train-teacher", "--data", data_dir().string(), "--out", teacher2.string()});
    same(teacher_dir() / "teacher_metrics.csv", teacher2 / "teacher_metrics.csv");
    same(teacher_ckpt(), teacher2 / "teacher.ckpt");

    const fs::path cfg = work_ / "ablation.cfg";
    if (!fs::exists(cfg)) write_config("ablation.cfg", gan_config(kAblationSeed, 500, 0.0));
    if (!fs::exists(work_ / "ablation_baseline" / "metrics.csv")) {
      train_gan("baseline", cfg, work_ / "ablation_baseline");
    }
    train_gan("baseline", cfg, work_ / "baseline_again");
    same(work_ / "ablation_baseline" / "metrics.csv", work_ / "baseline_again" / "metrics.csv");

    for (const char* dir : {"eval_a", "eval_b"}) {
      cli_run({"eval-localization", "--teacher", teacher_ckpt().string(), "--baseline",
               (work_ / "baseline_again" / "discriminator.ckpt").string(), "--generator",
               (work_ / "baseline_again" / "generator.ckpt").string(), "--data",
               data_dir().string(), "--n", "100", "--out", (work_ / dir).string()});
    }
    same(work_ / "eval_a" / "localization.csv", work_ / "eval_b" / "localization.csv");
    same(work_ / "eval_a" / "localization_samples.csv",
         work_ / "eval_b" / "localization_samples.csv");

    // Resume: 150 iterations, then continue to 300, against one straight run.
    const fs::path full_cfg = write_config("resume_full.cfg", gan_config(kAblationSeed, 300, 1.0));
    const fs::path half_cfg = write_config("resume_half.cfg", gan_config(kAblationSeed, 150, 1.0));
    const fs::path straight = work_ / "resume_straight", split = work_ / "resume_split";
    train_gan("ata", full_cfg, straight);
    train_gan("ata", half_cfg, split);
    train_gan("ata", full_cfg, split, true);
    same(straight / "metrics.csv", split / "metrics.csv");
    same(straight / "discriminator.ckpt", split / "discriminator.ckpt");
    same(straight / "generator.ckpt", split / "generator.ckpt");

    std::string detail = fmt("%zu artifact pairs compared (gen-data, train-teacher, train-gan, "
                             "eval-localization re-runs; ata run resumed at 150 of 300 vs "
                             "uninterrupted): ",
                             compared);
    if (problems.empty()) {
      detail += "all byte-identical";
    } else {
      detail += "differences in";
      for (const auto& p : problems) detail += " " + p;
    }
    return {problems.empty(), detail};
  }

  Outcome headline() {
    if (!fs::exists(teacher_ckpt())) return {false, "teacher checkpoint unavailable"};
    const auto t0 = Clock::now();
    const TeacherParams teacher = load_params<TeacherParams>(teacher_ckpt());
    std::vector<double> base_mass, ata_mass, scam100, scam_final;
    std::string csv = "seed,baseline_mass,ata_mass,delta,ata_l_scam_total_iter100,"
                      "ata_l_scam_total_final\n";
    for (std::uint64_t seed : kHeadlineSeeds) {
      const fs::path cfg = write_config("headline_seed" + std::to_string(seed) + ".cfg",
                                        gan_config(seed, kHeadlineIterations, kHeadlineLambda));
      const fs::path b = headline_dir("baseline", seed), a = headline_dir("ata", seed);
      if (train_gan("baseline", cfg, b) != 0 || train_gan("ata", cfg, a) != 0) {
        return {false, "train-gan failed for seed " + std::to_string(seed)};
      }
      EvalInputs in{teacher};
      in.d_baseline = load_params<DiscriminatorParams>(b / "discriminator.ckpt");
      in.d_ata = load_params<DiscriminatorParams>(a / "discriminator.ckpt");
      const auto reports = evaluate_run(in, val(), 200);
      base_mass.push_back(reports.at(1).mean_ratio);
      ata_mass.push_back(reports.at(2).mean_ratio);
      const auto cols = read_csv_columns(a / "metrics.csv");
      const auto& total = cols.at("l_scam_total");
      scam100.push_back(total.at(99));
      scam_final.push_back(total.back());
      csv += fmt("%llu,%.6f,%.6f,%.6f,%.6f,%.6f\n", (unsigned long long)seed, base_mass.back(),
                 ata_mass.back(), ata_mass.back() - base_mass.back(), scam100.back(),
                 scam_final.back());
      log(fmt("seed %llu: D-baseline mass %.4f, D-ata mass %.4f, L_SCAM_total %.4f -> %.4f",
              (unsigned long long)seed, base_mass.back(), ata_mass.back(), scam100.back(),
              scam_final.back()));
    }
    write_text(work_ / "headline.csv", csv);
    const double sec = seconds_since(t0);
    const double delta = mean(ata_mass) - mean(base_mass);
    const double scam_ratio = mean(scam_final) / mean(scam100);
    std::string per_seed;
    for (std::size_t i = 0; i < ata_mass.size(); ++i) {
      per_seed += fmt("%s%+.3f", i ? "/" : "", ata_mass[i] - base_mass[i]);
    }
    return {delta >= 0.10 && scam_ratio < 0.5 && sec < 7200,
            fmt("%zu paired seeds x %zu iterations, 200 real val images: D mass in mask ata %.4f "
                "vs baseline %.4f, delta %+.4f (per seed %s; need >= +0.10); ata L_SCAM_total "
                "final/iter100 %.3f (need < 0.5); %.0f s (limit 7200 s)",
                ata_mass.size(), kHeadlineIterations, mean(ata_mass), mean(base_mass), delta,
                per_seed.c_str(), scam_ratio, sec)};
  }

  Outcome generated_sanity() {
    std::size_t images = 0, grids = 0, bad_grids = 0;
    double min_std = INFINITY, sum_std = 0;
    for (std::uint64_t seed : kHeadlineSeeds) {
      const fs::path dir = headline_dir("ata", seed);
      if (!fs::exists(dir / "generator.ckpt")) return {false, "ata run missing for seed " + std::to_string(seed)};
      const GeneratorParams g = load_params<GeneratorParams>(dir / "generator.ckpt");
      Rng rng(derive_seed(seed, 0x9e4));
      Tensor z({64, kLatentDim});
      for (double& v : z.data()) v = rng.normal();
      const Tensor x = generator_forward(g, z);
      const std::size_t px = x.numel() / x.dim(0);
      for (std::size_t i = 0; i < x.dim(0); ++i) {
        const auto first = x.data().begin() + std::ptrdiff_t(i * px);
        const double m = std::accumulate(first, first + std::ptrdiff_t(px), 0.0) / double(px);
        double var = 0;
        for (auto it = first; it != first + std::ptrdiff_t(px); ++it) var += (*it - m) * (*it - m);
        const double sd = std::sqrt(var / double(px));
        min_std = std::min(min_std, sd);
        sum_std += sd;
        ++images;
      }
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".pgm") continue;
        ++grids;
        if (!valid_pgm(entry.path())) ++bad_grids;
      }
    }
    const fs::path ex = work_ / "export_ata";
    cli_run({"export-scam", "--checkpoint",
             (headline_dir("ata", kHeadlineSeeds[0]) / "discriminator.ckpt").string(), "--data",
             data_dir().string(), "--n", "16", "--out", ex.string()});
    std::size_t exported_files = 0;
    for (const char* name : {"images.pgm", "scam.pgm"}) {
      ++exported_files;
      if (!valid_pgm(ex / name)) ++bad_grids;
    }
    for (int i = 0; i < 16; ++i) {
      ++exported_files;
      try {
        const RgbImage img = read_ppm(ex / fmt("overlay_%04d.ppm", i));
        if (img.width != kImageSize || img.height != kImageSize) ++bad_grids;
      } catch (const std::exception&) {
        ++bad_grids;
      }
    }
    const bool ok = images > 0 && min_std > 0.05 && grids > 0 && bad_grids == 0;
    return {ok, fmt("%zu generated images from the final ata generators: per-image pixel std min "
                    "%.4f, mean %.4f (need > 0.05); %zu sample grids and %zu exported attention "
                    "files parsed, %zu invalid",
                    images, min_std, sum_std / double(std::max<std::size_t>(images, 1)), grids,
                    exported_files, bad_grids)};
  }

  // ----------------------------------------------------------------- helpers

  static constexpr std::uint64_t kAblationSeed = 11;
  static constexpr std::size_t kHeadlineIterations = 8000;
  static constexpr double kHeadlineLambda = 1.0;
  static constexpr std::uint64_t kHeadlineSeeds[] = {1, 2, 3};

 private:
  static TrainConfig gan_config(std::uint64_t seed, std::size_t iterations, double lambda) {
    TrainConfig t;
    t.seed = seed;
    t.iterations = iterations;
    t.lambda_scam = lambda;
    t.batch_size = 16;
    t.sample_every = 2000;
    t.checkpoint_every = 0;
    return t;
  }

  fs::path write_config(const std::string& name, const TrainConfig& t) {
    RunConfig cfg;
    cfg.train = t;
    const fs::path p = work_ / name;
    write_text(p, to_text(cfg));
    return p;
  }

  int train_gan(const char* mode, const fs::path& cfg, const fs::path& out, bool resume = false) {
    std::vector<std::string> args{"train-gan", "--mode",  mode, "--config", cfg.string(),
                                  "--data",    data_dir().string(), "--teacher",
                                  teacher_ckpt().string(), "--out", out.string()};
    if (resume) args.push_back("--resume");
    return cli_run(args);
  }

  static bool valid_pgm(const fs::path& p) {
    try {
      const GrayImage img = read_pgm(p);
      return img.width > 0 && img.height > 0 && img.pixels.size() == img.width * img.height;
    } catch (const std::exception& e) {
      log(p.string() + ": " + e.what());
      return false;
    }
  }

  static std::uint64_t fnv1a_bytes(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ull;
    return h;
  }

  const Dataset& val() {
    if (val_.size() == 0) val_ = read_split(data_dir(), true);
    return val_;
  }

  fs::path data_dir() const { return work_ / "data"; }
  fs::path teacher_dir() const { return work_ / "teacher"; }
  fs::path teacher_ckpt() const { return teacher_dir() / "teacher.ckpt"; }
  fs::path headline_dir(const char* mode, std::uint64_t seed) const {
    return work_ / ("headline_" + std::string(mode) + "_seed" + std::to_string(seed));
  }

  fs::path work_;
  Dataset val_;
};

}  // namespace

int main(int argc, char** argv) {
  fs::path work = "acceptance-work";
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::istringstream names(argv[++i]);
      std::string n;
      while (std::getline(names, n, ',')) only.insert(n);
    } else {
      std::cerr << "usage: atagan_acceptance [--work DIR] [--only name,name]\n";
      return 2;
    }
  }
  fs::create_directories(work);
  Acceptance acc(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient-suite", [&] { return acc.gradient_suite(); }},
      {"soft-cam-oracle", [&] { return acc.soft_cam_oracle(); }},
      {"teacher-accuracy", [&] { return acc.teacher_accuracy(); }},
      {"teacher-localization", [&] { return acc.teacher_localization(); }},
      {"ablation-identity", [&] { return acc.ablation_identity(); }},
      {"attention-overfit", [&] { return acc.attention_overfit(); }},
      {"determinism", [&] { return acc.determinism(); }},
      {"headline-attention-transfer", [&] { return acc.headline(); }},
      {"generated-image-sanity", [&] { return acc.generated_sanity(); }},
  };

  std::vector<std::string> lines;
  bool all = true;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    log("running " + name);
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const std::string line = std::string(o.pass ? "PASS " : "FAIL ") + name + ": " + o.detail;
    std::cout << line << std::endl;
    lines.push_back(line);
    all = all && o.pass;
  }
  std::cout << "\nsummary\n";
  for (const auto& l : lines) std::cout << l << '\n';
  std::ofstream(work / "acceptance.txt") << [&] {
    std::string s;
    for (const auto& l : lines) s += l + '\n';
    return s;
  }();
  return all ? 0 : 1;
}
