#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fopkit/eval.h"
#include "fopkit/model.h"
#include "fopkit/split.h"
#include "fopkit/synth.h"
#include "fopkit/trainer.h"

namespace fopkit::cli {

/// Every knob of every command, as one flat key=value document.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out = "fopkit-out";
  std::string data;  // directory written by `synth`

  SyntheticSpec synth;  // synth.seed is derived from `seed`
  SplitKind split_kind = SplitKind::kUnseenUnheard;
  SplitFractions fractions;

  std::size_t verify_trials = 2000;
  std::size_t match_trials = 500;
  std::vector<std::size_t> n_c = {2, 4, 6, 8, 10};

  std::size_t embed_dim = 128;
  FusionKind fusion = FusionKind::kGated;
  TrainConfig train;  // train.seed is `seed`

  std::string eval_task = "all";     // verify | match | all
  std::string eval_strata = "GNA";   // none | comma list of G,N,A,GNA; "GNA" alone means all four
  std::string eval_probe = "voice";  // voice | face | both
  ScorerKind scorer = ScorerKind::kCosine;

  std::vector<double> alpha_grid = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0};

  std::vector<std::size_t> bench_sizes = {50, 100, 200};
  std::size_t bench_batch = 32;
  std::size_t bench_identities = 4;

  RunConfig();
  void validate() const;
};

/// Parses key=value lines over the defaults. '#' starts a comment; unknown
/// keys, duplicate keys and malformed values are ConfigErrors naming the line.
RunConfig parse_run_config(std::string_view text, const std::string& source = "<config>");

/// Every key with its current value, in a fixed order. Parsing the result
/// reproduces `config` exactly.
std::string render_run_config(const RunConfig& config);

std::vector<std::string> run_config_keys();

/// Hex FNV-1a of the rendered config.
std::string config_hash(const RunConfig& config);

std::vector<StratumKey> strata_keys(const RunConfig& config);

}  // namespace fopkit::cli
