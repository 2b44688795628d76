#include "atagan/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "atagan/errors.hpp"

namespace atagan {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("'" + std::string(v) + "' is not a finite number");
  }
  return out;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("'" + std::string(v) + "' is not a non-negative integer");
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Key {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

Key train_size(std::size_t TrainConfig::*f) {
  return {[f](RunConfig& c, std::string_view v) { c.train.*f = to_u64(v); },
          [f](const RunConfig& c) { return std::to_string(c.train.*f); }};
}

Key train_double(double TrainConfig::*f) {
  return {[f](RunConfig& c, std::string_view v) { c.train.*f = to_double(v); },
          [f](const RunConfig& c) { return fmt_double(c.train.*f); }};
}

// Keys in canonical output order.
const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> k = {
      {"mode",
       {[](RunConfig& c, std::string_view v) { c.train.mode = parse_run_mode(v); },
        [](const RunConfig& c) { return std::string(to_string(c.train.mode)); }}},
      {"epochs", train_size(&TrainConfig::epochs)},
      {"batch_size", train_size(&TrainConfig::batch_size)},
      {"lr_teacher", train_double(&TrainConfig::lr_teacher)},
      {"lr_g", train_double(&TrainConfig::lr_g)},
      {"lr_d", train_double(&TrainConfig::lr_d)},
      {"beta1", train_double(&TrainConfig::beta1)},
      {"beta2", train_double(&TrainConfig::beta2)},
      {"adam_eps", train_double(&TrainConfig::adam_eps)},
      {"lambda_scam", train_double(&TrainConfig::lambda_scam)},
      {"seed",
       {[](RunConfig& c, std::string_view v) { c.train.seed = to_u64(v); },
        [](const RunConfig& c) { return std::to_string(c.train.seed); }}},
      {"disc_scam_gate",
       {[](RunConfig& c, std::string_view v) { c.train.disc_scam_gate = parse_scam_gate(v); },
        [](const RunConfig& c) { return std::string(to_string(c.train.disc_scam_gate)); }}},
      {"g_loss",
       {[](RunConfig& c, std::string_view v) { c.train.g_loss = parse_generator_loss(v); },
        [](const RunConfig& c) { return std::string(to_string(c.train.g_loss)); }}},
      {"iterations", train_size(&TrainConfig::iterations)},
      {"d_steps_per_g", train_size(&TrainConfig::d_steps_per_g)},
      {"sample_every", train_size(&TrainConfig::sample_every)},
      {"checkpoint_every", train_size(&TrainConfig::checkpoint_every)},
      {"metrics_file",
       {[](RunConfig& c, std::string_view v) { c.train.metrics_file = std::string(v); },
        [](const RunConfig& c) { return c.train.metrics_file; }}},
      {"n_train",
       {[](RunConfig& c, std::string_view v) { c.data.n_train = to_u64(v); },
        [](const RunConfig& c) { return std::to_string(c.data.n_train); }}},
      {"n_val",
       {[](RunConfig& c, std::string_view v) { c.data.n_val = to_u64(v); },
        [](const RunConfig& c) { return std::to_string(c.data.n_val); }}},
      {"data_seed",
       {[](RunConfig& c, std::string_view v) { c.data.seed = to_u64(v); },
        [](const RunConfig& c) { return std::to_string(c.data.seed); }}},
      {"noise_level",
       {[](RunConfig& c, std::string_view v) { c.data.noise_level = to_double(v); },
        [](const RunConfig& c) { return fmt_double(c.data.noise_level); }}},
  };
  return k;
}

}  // namespace

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::teacher: return "teacher";
    case RunMode::gan_baseline: return "gan-baseline";
    case RunMode::gan_ata: return "gan-ata";
  }
  return "unknown";
}

RunMode parse_run_mode(std::string_view s) {
  for (RunMode m : {RunMode::teacher, RunMode::gan_baseline, RunMode::gan_ata}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("mode must be teacher, gan-baseline or gan-ata, got '" + std::string(s) +
                    "'");
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
    const auto& table = keys();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it == table.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    }
    try {
      it->second.set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + std::string(key) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str(), path.string());
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(t.lr_teacher > 0 && t.lr_g > 0 && t.lr_d > 0, "learning rates must be > 0");
  require(t.beta1 >= 0 && t.beta1 < 1 && t.beta2 >= 0 && t.beta2 < 1,
          "beta1 and beta2 must lie in [0,1)");
  require(t.adam_eps > 0, "adam_eps must be > 0");
  require(t.lambda_scam >= 0, "lambda_scam must be >= 0");
  require(t.batch_size > 0, "batch_size must be > 0");
  require(t.d_steps_per_g > 0, "d_steps_per_g must be > 0");
  require(!t.metrics_file.empty() && t.metrics_file.find('/') == std::string::npos,
          "metrics_file must be a plain file name");
  require(cfg.data.noise_level >= 0, "noise_level must be >= 0");
  require(cfg.data.n_train > 0 && cfg.data.n_val > 0, "n_train and n_val must be > 0");
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, key] : keys()) out += name + " = " + key.get(cfg) + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace atagan
