#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fopkit/losses.h"
#include "fopkit/matrix.h"
#include "fopkit/model.h"
#include "fopkit/store.h"

namespace fopkit {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double lr0 = 1e-5;
  double lr_decay = 0.95;  // per epoch
  AdamOptions adam;
  std::uint64_t seed = 1;
  LossConfig loss;
  bool track_best = false;   // keep the parameters with the best validation score
  bool record_time = true;   // false writes 0 seconds so diagnostics are reproducible

  void validate() const;
};

/// lr0 * lr_decay^epoch, epoch counted from 0.
double lr_at(std::size_t epoch, const TrainConfig& config);

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t t = 0;

  static AdamState for_params(std::span<Parameter* const> params);
};

/// Bias-corrected Adam update of every parameter, then zeroes the gradients.
/// Throws NumericError naming the parameter if any gradient is not finite;
/// nothing is modified in that case.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr,
               const AdamOptions& options = {});

struct EpochDiagnostics {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // instance-weighted mean of batch losses
  double lr = 0.0;
  double same_cos = 0.0;  // mean cos over same-identity fused pairs
  double diff_cos = 0.0;  // mean |cos| over different-identity fused pairs
  double orth = 0.0;      // mean |cos| over all fused pairs
  double seconds = 0.0;
  std::uint64_t work = 0;
  std::size_t steps = 0;
};

/// Row-aligned face and voice features with identity labels.
struct TrainingSet {
  Matrix face;
  Matrix voice;
  std::vector<int> labels;

  static TrainingSet from_stores(const EmbeddingStore& face, const EmbeddingStore& voice,
                                 const std::vector<std::string>& ids);
  std::size_t size() const { return labels.size(); }
};

/// Row order of the first epoch for `seed`: the trainer shuffles 0..n-1 with
/// an Rng seeded from the shuffle sub-seed.
std::vector<std::size_t> first_epoch_order(std::size_t n, std::uint64_t seed);

/// Higher is better.
using Validator = std::function<double(const FopParams&)>;

struct FitResult {
  FopParams params;
  std::vector<EpochDiagnostics> history;
  std::vector<double> val_scores;
  std::optional<FopParams> best;  // set when track_best and a validator are given
  std::size_t best_epoch = 0;
};

/// Mini-batch training. Parameters are initialized from the config seed; the
/// training set is reshuffled every epoch.
FitResult fit(const TrainingSet& data, const FopConfig& model, const TrainConfig& config,
              const Validator& validator = {});

/// Continues training from given parameters.
FitResult fit(const TrainingSet& data, const FopConfig& model, const TrainConfig& config,
              FopParams init, const Validator& validator = {});

// epoch,loss,lr,same_cos,diff_cos,orth,seconds
std::string encode_diagnostics_csv(std::span<const EpochDiagnostics> history);

}  // namespace fopkit
