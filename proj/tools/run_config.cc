#include "run_config.h"

#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

#include "fopkit/errors.h"
#include "fopkit/rng.h"
#include "fopkit/text.h"

namespace fopkit::cli {
namespace {

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

std::string fmt(double x) { return text::format_double(x); }
std::string fmt(std::size_t x) { return std::to_string(x); }
std::string fmt(bool x) { return x ? "true" : "false"; }

double to_double(std::string_view s) { return text::parse_double(s, "value"); }
std::size_t to_size(std::string_view s) { return text::parse_uint(s, "value"); }
bool to_bool(std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw DataError("expected true or false, got '" + std::string(s) + "'");
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

template <typename T, typename F>
std::vector<T> split_list(std::string_view s, F f) {
  std::vector<T> out;
  for (auto cell : text::split(s, ',')) {
    const auto c = text::trim(cell);
    if (c.empty()) throw DataError("empty list entry");
    out.push_back(f(c));
  }
  return out;
}

#define SIZE_KEY(name, field) \
  Entry{name, [](const RunConfig& c) { return fmt(c.field); }, [](RunConfig& c, std::string_view s) { c.field = to_size(s); }}
#define DOUBLE_KEY(name, field) \
  Entry{name, [](const RunConfig& c) { return fmt(c.field); }, [](RunConfig& c, std::string_view s) { c.field = to_double(s); }}
#define BOOL_KEY(name, field) \
  Entry{name, [](const RunConfig& c) { return fmt(c.field); }, [](RunConfig& c, std::string_view s) { c.field = to_bool(s); }}
#define STRING_KEY(name, field) \
  Entry{name, [](const RunConfig& c) { return c.field; }, [](RunConfig& c, std::string_view s) { c.field = std::string(s); }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
            [](RunConfig& c, std::string_view s) { c.seed = text::parse_uint(s, "seed"); }},
      STRING_KEY("out", out),
      STRING_KEY("data", data),
      SIZE_KEY("synth.identities", synth.identities),
      SIZE_KEY("synth.per_identity", synth.per_identity),
      SIZE_KEY("synth.latent_dim", synth.latent_dim),
      SIZE_KEY("synth.face_dim", synth.face_dim),
      SIZE_KEY("synth.voice_dim", synth.voice_dim),
      DOUBLE_KEY("synth.noise", synth.noise),
      DOUBLE_KEY("synth.correlation", synth.correlation),
      DOUBLE_KEY("synth.language_shift", synth.language_shift),
      Entry{"split.kind", [](const RunConfig& c) { return to_string(c.split_kind); },
            [](RunConfig& c, std::string_view s) { c.split_kind = parse_split_kind(std::string(s)); }},
      DOUBLE_KEY("split.train", fractions.train),
      DOUBLE_KEY("split.val", fractions.val),
      DOUBLE_KEY("split.test", fractions.test),
      SIZE_KEY("trials.verify", verify_trials),
      SIZE_KEY("trials.match", match_trials),
      Entry{"trials.n_c", [](const RunConfig& c) { return join(c.n_c, [](std::size_t x) { return fmt(x); }); },
            [](RunConfig& c, std::string_view s) { c.n_c = split_list<std::size_t>(s, to_size); }},
      SIZE_KEY("model.embed_dim", embed_dim),
      Entry{"model.fusion", [](const RunConfig& c) { return to_string(c.fusion); },
            [](RunConfig& c, std::string_view s) { c.fusion = parse_fusion_kind(std::string(s)); }},
      Entry{"loss.kind", [](const RunConfig& c) { return to_string(c.train.loss.kind); },
            [](RunConfig& c, std::string_view s) { c.train.loss.kind = parse_loss_kind(std::string(s)); }},
      DOUBLE_KEY("loss.alpha", train.loss.alpha),
      DOUBLE_KEY("loss.alpha_c", train.loss.alpha_c),
      DOUBLE_KEY("loss.alpha_g", train.loss.alpha_g),
      DOUBLE_KEY("loss.margin", train.loss.margin),
      DOUBLE_KEY("loss.center_rate", train.loss.center_rate),
      SIZE_KEY("train.epochs", train.epochs),
      SIZE_KEY("train.batch_size", train.batch_size),
      DOUBLE_KEY("train.lr0", train.lr0),
      DOUBLE_KEY("train.lr_decay", train.lr_decay),
      DOUBLE_KEY("train.beta1", train.adam.beta1),
      DOUBLE_KEY("train.beta2", train.adam.beta2),
      DOUBLE_KEY("train.adam_eps", train.adam.eps),
      BOOL_KEY("train.track_best", train.track_best),
      BOOL_KEY("train.record_time", train.record_time),
      STRING_KEY("eval.task", eval_task),
      STRING_KEY("eval.strata", eval_strata),
      STRING_KEY("eval.probe", eval_probe),
      Entry{"eval.scorer", [](const RunConfig& c) { return to_string(c.scorer); },
            [](RunConfig& c, std::string_view s) { c.scorer = parse_scorer_kind(std::string(s)); }},
      Entry{"ablate.grid", [](const RunConfig& c) { return join(c.alpha_grid, [](double x) { return fmt(x); }); },
            [](RunConfig& c, std::string_view s) { c.alpha_grid = split_list<double>(s, to_double); }},
      Entry{"bench.sizes", [](const RunConfig& c) { return join(c.bench_sizes, [](std::size_t x) { return fmt(x); }); },
            [](RunConfig& c, std::string_view s) { c.bench_sizes = split_list<std::size_t>(s, to_size); }},
      SIZE_KEY("bench.batch", bench_batch),
      SIZE_KEY("bench.identities", bench_identities),
  };
  return table;
}

#undef SIZE_KEY
#undef DOUBLE_KEY
#undef BOOL_KEY
#undef STRING_KEY

}  // namespace

RunConfig::RunConfig() {
  train.lr0 = 2e-3;
  train.record_time = false;
  train.seed = seed;
}

void RunConfig::validate() const {
  synth.validate();
  if (fractions.train <= 0.0 || fractions.val < 0.0 || fractions.test <= 0.0 ||
      std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be positive and sum to 1");
  }
  if (n_c.empty()) throw ConfigError("trials.n_c must list at least one gallery size");
  for (std::size_t n : n_c)
    if (n < 2) throw ConfigError("gallery sizes must be >= 2");
  if (embed_dim < 1) throw ConfigError("model.embed_dim must be >= 1");
  train.validate();
  if (eval_task != "verify" && eval_task != "match" && eval_task != "all") {
    throw ConfigError("eval.task must be verify, match or all, got '" + eval_task + "'");
  }
  if (eval_probe != "voice" && eval_probe != "face" && eval_probe != "both") {
    throw ConfigError("eval.probe must be voice, face or both, got '" + eval_probe + "'");
  }
  strata_keys(*this);
  if (alpha_grid.empty()) throw ConfigError("ablate.grid must not be empty");
  for (double a : alpha_grid) {
    if (!(a >= 0.0)) throw ConfigError("alpha values must be >= 0, got " + fmt(a));
  }
  if (bench_sizes.empty()) throw ConfigError("bench.sizes must not be empty");
  if (bench_batch < 2) throw ConfigError("bench.batch must be >= 2");
  if (bench_identities < 2) throw ConfigError("bench.identities must be >= 2");
}

RunConfig parse_run_config(std::string_view content, const std::string& source) {
  RunConfig config;
  std::set<std::string> seen;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto line = rows[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const std::string where = source + " line " + std::to_string(i + 1);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value");
    const std::string key(text::trim(line.substr(0, eq)));
    const auto value = text::trim(line.substr(eq + 1));
    const Entry* entry = nullptr;
    for (const auto& e : entries())
      if (key == e.key) entry = &e;
    if (!entry) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      entry->set(config, value);
    } catch (const Error& e) {
      throw ConfigError(where + ": bad value for " + key + ": " + e.what());
    }
  }
  config.train.seed = config.seed;
  return config;
}

std::string render_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.key) + "=" + e.get(config) + "\n";
  return out;
}

std::vector<std::string> run_config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(render_run_config(config))));
  return buf;
}

std::vector<StratumKey> strata_keys(const RunConfig& config) {
  const std::string& s = config.eval_strata;
  if (s == "none" || s.empty()) return {};
  if (s == "GNA") return all_stratum_keys();
  std::vector<StratumKey> keys;
  for (auto cell : text::split(s, ',')) keys.push_back(parse_stratum_key(std::string(text::trim(cell))));
  return keys;
}

}  // namespace fopkit::cli
