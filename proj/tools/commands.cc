#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "fopkit/binary_io.h"
#include "fopkit/checkpoint.h"
#include "fopkit/errors.h"
#include "fopkit/eval.h"
#include "fopkit/losses.h"
#include "fopkit/rng.h"
#include "fopkit/split.h"
#include "fopkit/store.h"
#include "fopkit/synth.h"
#include "fopkit/text.h"
#include "fopkit/trainer.h"
#include "fopkit/trials.h"

namespace fopkit::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

// Written files of one command, with their hashes for the manifest.
class Run {
 public:
  Run(const Options& options, RunConfig config, std::ostream& log)
      : options_(options), config_(std::move(config)), log_(log) {}

  const RunConfig& config() const { return config_; }
  std::ostream& log() { return log_; }
  const fs::path& dir() const { return dir_; }

  void open_output() {
    if (config_.out.empty()) throw ConfigError("no output directory: pass --out DIR");
    dir_ = config_.out;
    if (fs::exists(dir_)) {
      if (!fs::is_directory(dir_)) throw ConfigError(config_.out + " exists and is not a directory");
      if (!fs::is_empty(dir_) && !options_.force) {
        throw ConfigError("output directory " + config_.out + " is not empty; pass --force to overwrite");
      }
    } else {
      fs::create_directories(dir_);
    }
  }

  void input(const std::string& path) { inputs_[absolute(path)] = file_hash(path); }

  void write(const std::string& name, std::string_view bytes, bool is_volatile = false) {
    io::write_file((dir_ / name).string(), bytes);
    // Volatile files are listed by name only; their hash would change per run.
    if (is_volatile) volatile_.push_back(name);
    else outputs_[name] = hex64(fnv1a(bytes));
  }

  // config.txt plus manifest.json; `extra` is merged into the manifest.
  void finish(const Json& extra = Json::object()) {
    RunConfig saved = config_;
    saved.out.clear();
    write(kConfigFile, render_run_config(saved));
    Json m;
    m["tool"] = "fopkit";
    m["version"] = kVersion;
    m["command"] = options_.command;
    Json args = Json::array({"--config", kConfigFile});
    auto flag = [&](const char* name, const std::string& value) {
      if (!value.empty()) {
        args.push_back(name);
        args.push_back(absolute(value));
      }
    };
    flag("--checkpoint", options_.checkpoint);
    flag("--store-a", options_.store_a);
    flag("--store-b", options_.store_b);
    m["args"] = args;
    m["seed"] = config_.seed;
    m["config_hash"] = config_hash(saved);
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["volatile"] = volatile_;
    io::write_file((dir_ / kManifestFile).string(), m.dump(2) + "\n");
  }

 private:
  const Options& options_;
  RunConfig config_;
  std::ostream& log_;
  fs::path dir_;
  Json inputs_ = Json::object();
  Json outputs_ = Json::object();
  Json volatile_ = Json::array();
};

struct DataDir {
  fs::path dir;
  EmbeddingStore face;
  EmbeddingStore voice;
  SplitSpec split;
};

DataDir load_data(Run& run) {
  const std::string& data = run.config().data;
  if (data.empty()) throw ConfigError("data= (or --data DIR) must name a synth output directory");
  DataDir d;
  d.dir = data;
  if (!fs::is_directory(d.dir)) throw DataError("data directory " + data + " does not exist");
  const auto face = (d.dir / kFaceStore).string();
  const auto voice = (d.dir / kVoiceStore).string();
  const auto split = (d.dir / kSplitFile).string();
  d.face = load_store(face);
  d.voice = load_store(voice);
  d.split = decode_split(io::read_file(split), split);
  for (const auto& p : {face, voice, split}) run.input(p);
  check_paired(d.face, d.voice);
  validate_split(d.split, d.face);
  return d;
}

std::string require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw DataError("missing " + what + ": " + path.string());
  return path.string();
}

std::vector<VerificationTrial> load_verify(Run& run, const DataDir& d) {
  const auto path = require_file(d.dir / kVerifyFile, "verification trial list");
  run.input(path);
  return decode_verification_trials(io::read_file(path), path);
}

Checkpoint load_ckpt(Run& run, const Options& o) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint PATH is required");
  require_file(o.checkpoint, "checkpoint");
  run.input(o.checkpoint);
  return load_checkpoint(o.checkpoint);
}

FopConfig model_config(const RunConfig& c, const EmbeddingStore& face, const EmbeddingStore& voice) {
  FopConfig m{face.dim(), voice.dim(), c.embed_dim, face.num_identities(), c.fusion};
  m.validate();
  return m;
}

std::uint64_t trial_seed(const RunConfig& c, const std::string& what) {
  return sub_seed(sub_seed(c.seed, kTrialStream), what);
}

void cmd_synth(Run& run) {
  const RunConfig& c = run.config();
  SyntheticSpec spec = c.synth;
  spec.seed = sub_seed(c.seed, kDataStream);
  const SyntheticData data = synthesize(spec);
  const SplitSpec split = make_split(data.face, data.voice, c.split_kind, c.fractions,
                                     sub_seed(spec.seed, "split"));
  const auto verify =
      build_verification_trials(data.face, data.voice, split.test, c.verify_trials, trial_seed(c, "verify"));
  std::vector<std::string> warnings = verify.warnings;
  std::map<Modality, std::vector<MatchingTrial>> matching;
  for (Modality probe : {Modality::kVoice, Modality::kFace}) {
    for (std::size_t n_c : c.n_c) {
      auto set = build_matching_trials(data.face, data.voice, split.test, n_c, c.match_trials,
                                       trial_seed(c, "match/" + to_string(probe) + "/" + std::to_string(n_c)),
                                       probe);
      auto& dst = matching[probe];
      dst.insert(dst.end(), set.trials.begin(), set.trials.end());
      if (probe == Modality::kVoice) warnings.insert(warnings.end(), set.warnings.begin(), set.warnings.end());
    }
  }
  run.open_output();
  run.write(kFaceStore, encode_store(data.face));
  run.write(kVoiceStore, encode_store(data.voice));
  if (data.voice_shifted) run.write(kShiftedVoiceStore, encode_store(*data.voice_shifted));
  run.write(kSplitFile, encode_split(split));
  run.write(kVerifyFile, encode_verification_trials(verify.trials));
  run.write(kMatchVoiceFile, encode_matching_trials(matching[Modality::kVoice]));
  run.write(kMatchFaceFile, encode_matching_trials(matching[Modality::kFace]));
  for (const auto& w : warnings) run.log() << "warning: " << w << "\n";
  run.log() << "synth: " << data.face.size() << " paired instances, " << data.face.num_identities()
            << " identities; split " << split.train.size() << "/" << split.val.size() << "/"
            << split.test.size() << " (" << to_string(split.kind) << ")\n";
  Json extra;
  extra["spec_hash"] = hex64(fnv1a(spec.canonical()));
  run.finish(extra);
}

double validation_auc(const DataDir& d, const RunConfig& c, const FopParams& params,
                      const std::vector<VerificationTrial>& trials) {
  return evaluate_verification(trials, TrialScorer(d.face, d.voice, params, c.scorer, 1)).auc;
}

void cmd_train(Run& run) {
  const RunConfig& c = run.config();
  const DataDir d = load_data(run);
  const FopConfig model = model_config(c, d.face, d.voice);
  const TrainingSet train = TrainingSet::from_stores(d.face, d.voice, d.split.train);
  Validator validator;
  std::vector<VerificationTrial> val_trials;
  if (c.train.track_best) {
    if (d.split.val.empty()) throw ConfigError("train.track_best needs a non-empty validation split");
    val_trials = build_verification_trials(d.face, d.voice, d.split.val, c.verify_trials,
                                           trial_seed(c, "validation")).trials;
    validator = [&](const FopParams& p) { return validation_auc(d, c, p, val_trials); };
  }
  const auto start = std::chrono::steady_clock::now();
  const FitResult result = fit(train, model, c.train, validator);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.open_output();
  run.write(kCheckpointFile, encode_checkpoint(model, result.params));
  if (result.best) run.write("checkpoint_best.fopc", encode_checkpoint(model, *result.best));
  run.write("diagnostics.csv", encode_diagnostics_csv(result.history), c.train.record_time);
  const auto& first = result.history.front();
  const auto& last = result.history.back();
  run.log() << "train: " << to_string(c.train.loss.kind) << ", " << result.history.size() << " epochs, "
            << train.size() << " instances; loss " << text::format_fixed(first.loss, 4) << " -> "
            << text::format_fixed(last.loss, 4) << " in " << text::format_fixed(seconds, 1) << " s\n";
  if (result.best) run.log() << "best validation AUC at epoch " << result.best_epoch << "\n";
  run.finish();
}

std::vector<MatchingTrial> load_matching(Run& run, const DataDir& d, Modality probe,
                                         const std::vector<std::size_t>& n_c) {
  const auto path = require_file(d.dir / (probe == Modality::kVoice ? kMatchVoiceFile : kMatchFaceFile),
                                 "matching trial list");
  run.input(path);
  std::vector<MatchingTrial> all = decode_matching_trials(io::read_file(path), path);
  std::vector<MatchingTrial> kept;
  for (std::size_t n : n_c) {
    std::size_t found = 0;
    for (const auto& t : all) {
      if (t.gallery.size() == n && t.probe_modality == probe) {
        kept.push_back(t);
        ++found;
      }
    }
    if (found == 0) {
      throw DataError("missing trial list: no " + to_string(probe) + "-probe trials with n_c=" +
                      std::to_string(n) + " in " + path);
    }
  }
  return kept;
}

std::string encode_roc_csv(const RocCurve& roc) {
  std::string out = "far,tar,threshold\n";
  for (const auto& p : roc.points) {
    out += text::format_double(p.far) + "," + text::format_double(p.tar) + "," +
           text::format_double(p.threshold) + "\n";
  }
  return out;
}

void cmd_eval(Run& run, const Options& o) {
  const RunConfig& c = run.config();
  const Checkpoint ckpt = load_ckpt(run, o);
  const DataDir d = load_data(run);
  const TrialScorer scorer(d.face, d.voice, ckpt.params, c.scorer, eval_threads());
  EvalReport report;
  if (c.eval_task != "match") {
    const auto trials = load_verify(run, d);
    report.overall = evaluate_verification(trials, scorer);
    const auto keys = strata_keys(c);
    report.strata = evaluate_strata(trials, scorer, keys);
  }
  if (c.eval_task != "verify") {
    std::vector<Modality> probes;
    if (c.eval_probe != "face") probes.push_back(Modality::kVoice);
    if (c.eval_probe != "voice") probes.push_back(Modality::kFace);
    for (Modality probe : probes) {
      report.matching.emplace_back(probe, match_1_to_n(load_matching(run, d, probe, c.n_c), scorer));
    }
  }
  run.open_output();
  run.write("report.csv", encode_eval_csv(report));
  const std::string table = format_eval_table(report);
  run.write("report.txt", table);
  if (report.overall) run.write("roc.csv", encode_roc_csv(report.overall->roc));
  run.log() << table;
  run.finish();
}

void cmd_ablate_alpha(Run& run) {
  const RunConfig& c = run.config();
  const DataDir d = load_data(run);
  const FopConfig model = model_config(c, d.face, d.voice);
  const TrainingSet train = TrainingSet::from_stores(d.face, d.voice, d.split.train);
  const auto trials = load_verify(run, d);
  std::string header = "metric", eer_row = "EER", auc_row = "AUC";
  for (double alpha : c.alpha_grid) {
    TrainConfig tc = c.train;
    tc.loss.kind = LossKind::kFopJoint;
    tc.loss.alpha = alpha;
    const FitResult result = fit(train, model, tc);
    const auto r = evaluate_verification(trials, TrialScorer(d.face, d.voice, result.params, c.scorer,
                                                             eval_threads()));
    header += "," + text::format_double(alpha);
    eer_row += "," + text::format_double(r.eer);
    auc_row += "," + text::format_double(r.auc);
    run.log() << "alpha=" << text::format_double(alpha) << "  EER " << text::format_fixed(100 * r.eer, 2)
              << "%  AUC " << text::format_fixed(100 * r.auc, 2) << "%\n";
  }
  run.open_output();
  run.write("ablate_alpha.csv", header + "\n" + eer_row + "\n" + auc_row + "\n");
  run.finish();
}

void cmd_bench_losses(Run& run) {
  const RunConfig& c = run.config();
  const std::size_t max_n = *std::max_element(c.bench_sizes.begin(), c.bench_sizes.end());
  SyntheticSpec spec = c.synth;
  spec.identities = c.bench_identities;
  spec.per_identity = std::max<std::size_t>(2, (max_n + c.bench_identities - 1) / c.bench_identities);
  spec.language_shift = 0.0;
  spec.seed = sub_seed(c.seed, kDataStream);
  const SyntheticData data = synthesize(spec);

  // Instances interleaved across identities, so every prefix is balanced.
  std::map<std::int32_t, std::vector<std::string>> by_label;
  for (const auto& r : data.face.records()) by_label[r.label].push_back(r.id);
  std::vector<std::string> interleaved;
  for (std::size_t k = 0; k < spec.per_identity; ++k)
    for (const auto& [y, ids] : by_label) interleaved.push_back(ids[k]);

  const FopConfig model{spec.face_dim, spec.voice_dim, c.embed_dim, spec.identities, c.fusion};
  std::string csv = "n,batch,loss,work,predicted\n";
  std::string timing = "n,loss,seconds\n";
  std::map<std::pair<std::size_t, LossKind>, std::uint64_t> work;
  for (std::size_t n : c.bench_sizes) {
    const std::vector<std::string> ids(interleaved.begin(), interleaved.begin() + n);
    const TrainingSet train = TrainingSet::from_stores(data.face, data.voice, ids);
    for (LossKind kind : all_loss_kinds()) {
      TrainConfig tc = c.train;
      tc.epochs = 1;
      tc.batch_size = c.bench_batch;
      tc.loss.kind = kind;
      const auto start = std::chrono::steady_clock::now();
      const FitResult result = fit(train, model, tc);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const std::uint64_t measured = result.history.front().work;
      std::vector<int> ordered;
      for (std::size_t i : first_epoch_order(n, tc.seed)) ordered.push_back(train.labels[i]);
      const LossKind predicted_kind =
          kind == LossKind::kFopJoint && tc.loss.alpha == 0.0 ? LossKind::kCeOnly : kind;
      const std::uint64_t predicted = count_work(predicted_kind, c.bench_batch, n, ordered);
      if (measured != predicted) {
        throw Error("work counter for " + to_string(kind) + " at n=" + std::to_string(n) + " is " +
                    std::to_string(measured) + ", predicted " + std::to_string(predicted));
      }
      work[{n, kind}] = measured;
      csv += std::to_string(n) + "," + std::to_string(c.bench_batch) + "," + to_string(kind) + "," +
             std::to_string(measured) + "," + std::to_string(predicted) + "\n";
      timing += std::to_string(n) + "," + to_string(kind) + "," + text::format_double(seconds) + "\n";
      run.log() << "n=" << n << " " << to_string(kind) << ": work " << measured << ", "
                << text::format_fixed(seconds * 1e3, 2) << " ms\n";
    }
  }
  auto w = [&](LossKind k) { return work.at({max_n, k}); };
  const bool ordered = w(LossKind::kCeOnly) < w(LossKind::kCenter) &&
                       w(LossKind::kCenter) <= w(LossKind::kGit) &&
                       w(LossKind::kGit) < w(LossKind::kContrastive) &&
                       w(LossKind::kContrastive) < w(LossKind::kTriplet);
  run.log() << "ordering ce < center <= git < contrastive < triplet at n=" << max_n << ": "
            << (ordered ? "holds" : "violated") << "\n";
  std::string ratios = "n_small,n_large,measured_ratio,quadratic_ratio,rel_dev\n";
  std::vector<std::size_t> sizes = c.bench_sizes;
  std::sort(sizes.begin(), sizes.end());
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const double a = static_cast<double>(work.at({sizes[i], LossKind::kContrastive}));
    const double b = static_cast<double>(work.at({sizes[i + 1], LossKind::kContrastive}));
    const double q = std::pow(static_cast<double>(sizes[i + 1]) / static_cast<double>(sizes[i]), 2);
    const double dev = a > 0 ? (b / a - q) / q : 0.0;
    ratios += std::to_string(sizes[i]) + "," + std::to_string(sizes[i + 1]) + "," +
              text::format_double(a > 0 ? b / a : 0.0) + "," + text::format_double(q) + "," +
              text::format_double(dev) + "\n";
  }
  run.open_output();
  run.write("bench_losses.csv", csv);
  run.write("bench_contrastive_growth.csv", ratios);
  run.write("bench_timing.csv", timing, true);
  run.finish();
}

void cmd_crosslang(Run& run, const Options& o) {
  const RunConfig& c = run.config();
  const Checkpoint ckpt = load_ckpt(run, o);
  const DataDir d = load_data(run);
  const std::string a = o.store_a.empty() ? (d.dir / kVoiceStore).string() : o.store_a;
  const std::string b = o.store_b.empty() ? (d.dir / kShiftedVoiceStore).string() : o.store_b;
  require_file(a, "heard-language voice store");
  require_file(b, "unheard-language voice store");
  const EmbeddingStore heard = load_store(a);
  const EmbeddingStore unheard = load_store(b);
  run.input(a);
  run.input(b);
  const auto trials = load_verify(run, d);
  const auto r = cross_language_eval(trials, d.face, heard, unheard, ckpt.params, c.scorer, eval_threads());

  std::vector<ClassStats> stats;
  for (const auto& [store, tag] : {std::pair{&heard, "heard"}, std::pair{&unheard, "unheard"}}) {
    const auto rows = rows_of(*store, d.split.test);
    std::vector<std::int32_t> labels;
    for (std::size_t i : rows) labels.push_back(store->at(i).label);
    const auto s = class_stats(embed_voices(store->matrix(rows), ckpt.params), labels, tag);
    stats.insert(stats.end(), s.begin(), s.end());
  }
  const std::string row = to_string(c.train.loss.kind) + "," + text::format_double(r.heard.eer) + "," +
                          text::format_double(r.unheard.eer) + "," + text::format_double(r.pct_change);
  run.open_output();
  run.write("crosslang.csv", "config,heard_eer,unheard_eer,pct_change\n" + row + "\n");
  run.write("class_stats.csv", encode_class_stats_csv(stats));
  run.log() << "            heard   unheard   change\n"
            << "  EER%   " << text::format_fixed(100 * r.heard.eer, 2) << "    "
            << text::format_fixed(100 * r.unheard.eer, 2) << "    " << (r.pct_change >= 0 ? "+" : "")
            << text::format_fixed(r.pct_change, 1) << "%\n";
  run.finish();
}

RunConfig effective_config(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : parse_run_config(io::read_file(o.config_path), o.config_path);
  if (o.seed) c.seed = *o.seed;
  c.train.seed = c.seed;
  if (!o.data.empty()) c.data = o.data;
  c.data = absolute(c.data);
  if (!o.out.empty()) c.out = o.out;
  if (!o.grid.empty()) c.alpha_grid = parse_run_config("ablate.grid=" + o.grid, "--grid").alpha_grid;
  c.validate();
  return c;
}

}  // namespace

std::string file_hash(const std::string& path) { return hex64(fnv1a(io::read_file(path))); }

void run_command(const Options& o, std::ostream& out) {
  if (o.command == "defaults") {
    out << render_run_config(RunConfig{});
    return;
  }
  if (!o.config_path.empty()) require_file(o.config_path, "config file");
  Run run(o, effective_config(o), out);
  if (o.command == "synth") {
    cmd_synth(run);
  } else if (o.command == "train") {
    cmd_train(run);
  } else if (o.command == "eval") {
    cmd_eval(run, o);
  } else if (o.command == "ablate-alpha") {
    cmd_ablate_alpha(run);
  } else if (o.command == "bench-losses") {
    cmd_bench_losses(run);
  } else if (o.command == "crosslang") {
    cmd_crosslang(run, o);
  } else {
    throw ConfigError("unknown command '" + o.command + "'");
  }
}

void rerun_manifest(const std::string& manifest_path, const std::string& out_dir, std::ostream& out) {
  const Json m = Json::parse(io::read_file(manifest_path), nullptr, false);
  if (m.is_discarded() || !m.contains("command") || !m.contains("args")) {
    throw DataError(manifest_path + ": not a fopkit manifest");
  }
  const fs::path base = fs::path(manifest_path).parent_path();
  Options o;
  o.command = m["command"].get<std::string>();
  o.out = out_dir;
  const auto& args = m["args"];
  for (std::size_t i = 0; i + 1 < args.size(); i += 2) {
    const auto flag = args[i].get<std::string>();
    const auto value = args[i + 1].get<std::string>();
    if (flag == "--config") {
      o.config_path = (base / value).string();
    } else if (flag == "--checkpoint") {
      o.checkpoint = value;
    } else if (flag == "--store-a") {
      o.store_a = value;
    } else if (flag == "--store-b") {
      o.store_b = value;
    } else {
      throw DataError(manifest_path + ": unexpected argument " + flag);
    }
  }
  run_command(o, out);
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fopkit: face-voice association training and evaluation on precomputed embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;
  std::uint64_t seed = 0;
  struct Verb {
    const char* name;
    const char* help;
  };
  const Verb verbs[] = {
      {"synth", "write synthetic paired stores, a split and trial lists"},
      {"train", "train a model and write a checkpoint with per-epoch diagnostics"},
      {"eval", "verification, stratified verification and 1:n_c matching reports"},
      {"ablate-alpha", "train and evaluate over a grid of orthogonality weights"},
      {"bench-losses", "one epoch per loss kind with exact work counters"},
      {"crosslang", "heard vs unheard language verification"},
      {"defaults", "print every config key with its default value"},
  };
  for (const auto& verb : verbs) {
    CLI::App* sub = app.add_subcommand(verb.name, verb.help);
    sub->final_callback([&o, name = verb.name] { o.command = name; });
    if (std::string(verb.name) == "defaults") continue;
    sub->add_option("--config", o.config_path, "key=value config file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--data", o.data, "synth output directory holding stores, split and trials");
    sub->add_flag("--force", o.force, "write into a non-empty output directory");
    sub->add_option("--seed", seed, "top-level seed, overrides the config")
        ->each([&o](const std::string& s) { o.seed = text::parse_uint(s, "--seed"); });
    sub->add_option("--checkpoint", o.checkpoint, "model checkpoint");
    if (std::string(verb.name) == "crosslang") {
      sub->add_option("--store-a", o.store_a, "heard-language voice store");
      sub->add_option("--store-b", o.store_b, "unheard-language voice store");
    }
    if (std::string(verb.name) == "ablate-alpha") {
      sub->add_option("--grid", o.grid, "comma-separated alpha values");
    }
  }
  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    run_command(o, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DimensionError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace fopkit::cli
