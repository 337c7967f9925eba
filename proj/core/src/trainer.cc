#include "fopkit/trainer.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "fopkit/errors.h"
#include "fopkit/ops.h"
#include "fopkit/rng.h"
#include "fopkit/text.h"

namespace fopkit {
namespace {

constexpr std::size_t kNoPartner = std::numeric_limits<std::size_t>::max();

// Pair-weighted running means of the fused-embedding cosine statistics.
struct CosineTally {
  double same = 0.0, diff = 0.0, all = 0.0;
  std::uint64_t same_pairs = 0, diff_pairs = 0;

  void add(const OcTerms& t) {
    same += t.same_mean * static_cast<double>(t.same_pairs);
    diff += t.diff_abs_mean * static_cast<double>(t.diff_pairs);
    all += t.all_abs_mean * static_cast<double>(t.same_pairs + t.diff_pairs);
    same_pairs += t.same_pairs;
    diff_pairs += t.diff_pairs;
  }
  void write(EpochDiagnostics& d) const {
    d.same_cos = same_pairs ? same / static_cast<double>(same_pairs) : 0.0;
    d.diff_cos = diff_pairs ? diff / static_cast<double>(diff_pairs) : 0.0;
    const auto pairs = same_pairs + diff_pairs;
    d.orth = pairs ? all / static_cast<double>(pairs) : 0.0;
  }
};

struct StepResult {
  double loss = 0.0;
  std::uint64_t work = 0;
};

class Trainer {
 public:
  Trainer(const TrainingSet& data, const FopConfig& model, const TrainConfig& config)
      : data_(data), model_(model), config_(config), bank_(model.num_identities, model.embed_dim) {}

  FitResult run(FopParams params, const Validator& validator) {
    FitResult result;
    AdamState adam = AdamState::for_params(params.all());
    Rng rng(sub_seed(config_.seed, kShuffleStream));
    const std::size_t n = data_.size();
    const bool merge = requires_pairs(config_.loss);
    double best_score = -std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
      const auto start = std::chrono::steady_clock::now();
      EpochDiagnostics diag;
      diag.epoch = epoch + 1;
      diag.lr = lr_at(epoch, config_);

      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      seeded_shuffle(order, rng);

      negatives_.clear();
      if (config_.loss.kind == LossKind::kContrastive) {
        std::vector<int> shuffled(n);
        for (std::size_t i = 0; i < n; ++i) shuffled[i] = data_.labels[order[i]];
        const auto pairs = build_contrastive_pairs(shuffled, rng);
        diag.work += pairs.examined;
        negatives_.assign(n, kNoPartner);
        for (std::size_t i = 0; i < n; ++i) {
          if (pairs.negative_of[i] != kNoPartner) negatives_[order[i]] = order[pairs.negative_of[i]];
        }
      }

      CosineTally tally;
      double loss_sum = 0.0;
      std::size_t offset = 0;
      const auto sizes = batch_sizes(n, config_.batch_size, merge);
      for (std::size_t b = 0; b < sizes.size(); ++b) {
        const std::span<const std::size_t> rows(order.data() + offset, sizes[b]);
        offset += sizes[b];
        const StepResult step = train_batch(rows, params, tally);
        if (!std::isfinite(step.loss)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                             std::to_string(b));
        }
        adam_step(params.all(), adam, diag.lr, config_.adam);
        loss_sum += step.loss * static_cast<double>(rows.size());
        diag.work += step.work;
        ++diag.steps;
      }
      diag.loss = n ? loss_sum / static_cast<double>(n) : 0.0;
      tally.write(diag);
      if (config_.record_time) {
        diag.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      result.history.push_back(diag);

      if (validator) {
        const double score = validator(params);
        result.val_scores.push_back(score);
        if (config_.track_best && score > best_score) {
          best_score = score;
          result.best = params;
          result.best_epoch = epoch + 1;
        }
      }
    }
    result.params = std::move(params);
    return result;
  }

 private:
  StepResult train_batch(std::span<const std::size_t> rows, FopParams& params, CosineTally& tally) {
    const std::size_t batch = rows.size();
    std::vector<int> labels(batch);
    for (std::size_t i = 0; i < batch; ++i) labels[i] = data_.labels[rows[i]];
    const LossConfig& lc = config_.loss;

    if (lc.kind == LossKind::kContrastive) return contrastive_batch(rows, labels, params, tally);

    const ForwardCache cache =
        forward(gather_rows(data_.face, rows), gather_rows(data_.voice, rows), params, model_);
    tally.add(oc_terms(cache.fused, labels));
    LossOutput out;
    StepResult step;
    switch (lc.kind) {
      case LossKind::kCeOnly:
        out = ce_loss(cache.logits, labels);
        step.work = out.work;
        break;
      case LossKind::kFopJoint:
        out = fop_joint(cache, labels, lc.alpha);
        step.work = out.work;
        break;
      case LossKind::kCenter:
      case LossKind::kGit: {
        out = ce_loss(cache.logits, labels);
        const LossOutput c = center_loss(cache.fused, labels, bank_);
        out.value += lc.alpha_c * c.value;
        out.grads.fused = ops::scale(c.grads.fused, lc.alpha_c);
        step.work = out.work + c.work;
        if (lc.kind == LossKind::kGit) {
          const LossOutput g = git_loss(cache.fused, labels, bank_);
          out.value += lc.alpha_g * g.value;
          ops::axpy(out.grads.fused, lc.alpha_g, g.grads.fused);
          step.work += g.work;
        }
        break;
      }
      case LossKind::kTriplet: {
        const TripletMining mined = mine_hard_negatives(cache.proj.u, cache.proj.v, labels);
        out = triplet_loss(cache.proj.u, cache.proj.v, mined.triplets, lc.margin);
        step.work = mined.candidates;
        break;
      }
      case LossKind::kContrastive:
        break;
    }
    step.loss = out.value;
    if (std::isfinite(step.loss)) backward(cache, out.grads, params, model_);
    if (lc.kind == LossKind::kCenter || lc.kind == LossKind::kGit) {
      update_centers(bank_, cache.fused, labels, lc.center_rate);
    }
    return step;
  }

  // Genuine pair (face_i, voice_i) and the epoch's negative (face_i, voice_j)
  // for every instance of the batch.
  StepResult contrastive_batch(std::span<const std::size_t> rows, const std::vector<int>& labels,
                               FopParams& params, CosineTally& tally) {
    std::vector<std::size_t> face_rows(rows.begin(), rows.end());
    std::vector<std::size_t> voice_rows(rows.begin(), rows.end());
    std::vector<int> pair_labels(rows.size(), 1);
    for (std::size_t r : rows) {
      if (negatives_[r] == kNoPartner) continue;
      face_rows.push_back(r);
      voice_rows.push_back(negatives_[r]);
      pair_labels.push_back(0);
    }
    const ForwardCache cache = forward(gather_rows(data_.face, face_rows),
                                       gather_rows(data_.voice, voice_rows), params, model_);
    std::vector<std::size_t> head(rows.size());
    std::iota(head.begin(), head.end(), 0);
    tally.add(oc_terms(gather_rows(cache.fused, head), labels));
    const LossOutput out = contrastive_loss(cache.proj.u, cache.proj.v, pair_labels, config_.loss.margin);
    if (std::isfinite(out.value)) backward(cache, out.grads, params, model_);
    return {out.value, 0};
  }

  const TrainingSet& data_;
  const FopConfig& model_;
  const TrainConfig& config_;
  CenterBank bank_;
  std::vector<std::size_t> negatives_;  // by training row
};

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (requires_pairs(loss) && batch_size < 2) {
    throw ConfigError("loss " + to_string(loss.kind) + " needs batch_size >= 2");
  }
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("lr0 must be finite and > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw ConfigError("lr_decay must lie in (0, 1], got " + text::format_double(lr_decay));
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("adam eps must be > 0");
  loss.validate();
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  return config.lr0 * std::pow(config.lr_decay, static_cast<double>(epoch));
}

AdamState AdamState::for_params(std::span<Parameter* const> params) {
  AdamState s;
  for (const Parameter* p : params) {
    s.m.emplace_back(p->value.rows(), p->value.cols());
    s.v.emplace_back(p->value.rows(), p->value.cols());
  }
  return s;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr,
               const AdamOptions& options) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam state holds " + std::to_string(state.m.size()) + " moments for " +
                         std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    if (!p.grad.same_shape(p.value) || !state.m[i].same_shape(p.value) ||
        !state.v[i].same_shape(p.value)) {
      throw DimensionError("adam: shape mismatch for parameter " + p.name);
    }
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p.name);
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(options.beta1, t);
  const double c2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    auto& m = state.m[i].data();
    auto& v = state.v[i].data();
    auto& w = p.value.data();
    auto& g = p.grad.data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = options.beta1 * m[k] + (1.0 - options.beta1) * g[k];
      v[k] = options.beta2 * v[k] + (1.0 - options.beta2) * g[k] * g[k];
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + options.eps);
      g[k] = 0.0;
    }
  }
}

TrainingSet TrainingSet::from_stores(const EmbeddingStore& face, const EmbeddingStore& voice,
                                     const std::vector<std::string>& ids) {
  check_paired(face, voice);
  TrainingSet s;
  std::vector<std::size_t> face_rows, voice_rows;
  for (const auto& id : ids) {
    face_rows.push_back(face.index_of(id));
    voice_rows.push_back(voice.index_of(id));
    s.labels.push_back(face.at(face_rows.back()).label);
  }
  s.face = face.matrix(face_rows);
  s.voice = voice.matrix(voice_rows);
  return s;
}

std::vector<std::size_t> first_epoch_order(std::size_t n, std::uint64_t seed) {
  Rng rng(sub_seed(seed, kShuffleStream));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  seeded_shuffle(order, rng);
  return order;
}

FitResult fit(const TrainingSet& data, const FopConfig& model, const TrainConfig& config,
              const Validator& validator) {
  model.validate();
  return fit(data, model, config, FopParams::init(model, sub_seed(config.seed, kInitStream)), validator);
}

FitResult fit(const TrainingSet& data, const FopConfig& model, const TrainConfig& config,
              FopParams init, const Validator& validator) {
  model.validate();
  config.validate();
  if (data.size() == 0) throw DataError("training set is empty");
  if (data.face.rows() != data.size() || data.voice.rows() != data.size()) {
    throw DimensionError("training set rows are not aligned");
  }
  if (data.face.cols() != model.face_dim || data.voice.cols() != model.voice_dim) {
    throw DimensionError("training features " + std::to_string(data.face.cols()) + "/" +
                         std::to_string(data.voice.cols()) + " do not match model dims " +
                         std::to_string(model.face_dim) + "/" + std::to_string(model.voice_dim));
  }
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.num_identities) {
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(model.num_identities) + ")");
    }
  }
  if (!init.shapes_match(model)) throw DimensionError("initial parameters do not match the model");
  return Trainer(data, model, config).run(std::move(init), validator);
}

std::string encode_diagnostics_csv(std::span<const EpochDiagnostics> history) {
  std::string out = "epoch,loss,lr,same_cos,diff_cos,orth,seconds\n";
  for (const auto& d : history) {
    out += std::to_string(d.epoch) + "," + text::format_double(d.loss) + "," +
           text::format_double(d.lr) + "," + text::format_double(d.same_cos) + "," +
           text::format_double(d.diff_cos) + "," + text::format_double(d.orth) + "," +
           text::format_double(d.seconds) + "\n";
  }
  return out;
}

}  // namespace fopkit
