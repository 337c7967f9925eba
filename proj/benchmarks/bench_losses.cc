// Per-batch cost of each loss at a fixed batch size, and one training epoch
// as the training-set size grows.

#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "fopkit/losses.h"
#include "fopkit/model.h"
#include "fopkit/rng.h"
#include "fopkit/synth.h"
#include "fopkit/trainer.h"

namespace {

using namespace fopkit;

constexpr std::size_t kFace = 64, kVoice = 48, kDim = 128, kIds = 4;

struct Batch {
  FopConfig config{kFace, kVoice, kDim, kIds, FusionKind::kGated};
  FopParams params;
  Matrix face, voice;
  std::vector<int> labels;
  std::vector<int> pair_labels;  // row i pairs face i with voice i; alternating match flag
  CenterBank bank{kIds, kDim};
};

Batch make_batch(std::size_t b) {
  Batch out;
  out.params = FopParams::init(out.config, 7);
  Rng rng(11);
  out.face = Matrix(b, kFace);
  out.voice = Matrix(b, kVoice);
  for (std::size_t i = 0; i < b; ++i) {
    out.labels.push_back(static_cast<int>(i % kIds));
    out.pair_labels.push_back(static_cast<int>(i % 2));
    for (std::size_t j = 0; j < kFace; ++j) out.face(i, j) = standard_normal(rng);
    for (std::size_t j = 0; j < kVoice; ++j) out.voice(i, j) = standard_normal(rng);
  }
  return out;
}

void BM_LossForwardBackward(benchmark::State& state) {
  const auto kind = static_cast<LossKind>(state.range(0));
  Batch b = make_batch(static_cast<std::size_t>(state.range(1)));
  Rng rng(3);
  std::uint64_t work = 0;
  for (auto _ : state) {
    b.params.zero_grad();
    const ForwardCache fc = forward(b.face, b.voice, b.params, b.config);
    LossOutput out;
    switch (kind) {
      case LossKind::kCeOnly: out = ce_loss(fc.logits, b.labels); break;
      case LossKind::kFopJoint: out = fop_joint(fc, b.labels, 1.0); break;
      case LossKind::kCenter: out = center_loss(fc.fused, b.labels, b.bank); break;
      case LossKind::kGit: out = git_loss(fc.fused, b.labels, b.bank); break;
      case LossKind::kContrastive: {
        const ContrastivePairs pairs = build_contrastive_pairs(b.labels, rng);
        out = contrastive_loss(fc.proj.u, fc.proj.v, b.pair_labels, 0.6);
        out.work = pairs.examined;
        break;
      }
      case LossKind::kTriplet: {
        const TripletMining m = mine_hard_negatives(fc.proj.u, fc.proj.v, b.labels);
        out = triplet_loss(fc.proj.u, fc.proj.v, m.triplets, 0.6);
        out.work = m.candidates;
        break;
      }
    }
    backward(fc, out.grads, b.params, b.config);
    work = out.work;
    benchmark::DoNotOptimize(out.value);
  }
  state.SetLabel(to_string(kind));
  state.counters["work"] = static_cast<double>(work);
}

void loss_args(benchmark::internal::Benchmark* bench) {
  for (LossKind kind : all_loss_kinds())
    for (int b : {32, 128}) bench->Args({static_cast<int>(kind), b});
}
BENCHMARK(BM_LossForwardBackward)->Apply(loss_args)->Unit(benchmark::kMicrosecond);

void BM_EpochBySize(benchmark::State& state) {
  const auto kind = static_cast<LossKind>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  SyntheticSpec spec;
  spec.identities = kIds;
  spec.per_identity = n / kIds;
  const SyntheticData d = synthesize(spec);
  std::map<std::int32_t, std::vector<std::string>> by_label;
  for (const auto& r : d.face.records()) by_label[r.label].push_back(r.id);
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < spec.per_identity; ++k)
    for (const auto& [label, members] : by_label) ids.push_back(members[k]);
  const TrainingSet set = TrainingSet::from_stores(d.face, d.voice, ids);
  const FopConfig model{spec.face_dim, spec.voice_dim, kDim, kIds, FusionKind::kGated};
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 32;
  tc.loss.kind = kind;
  tc.record_time = false;
  std::uint64_t work = 0;
  for (auto _ : state) work = fit(set, model, tc).history.front().work;
  state.SetLabel(to_string(kind));
  state.counters["work"] = static_cast<double>(work);
}

void epoch_args(benchmark::internal::Benchmark* bench) {
  for (LossKind kind : all_loss_kinds())
    for (int n : {100, 200, 400}) bench->Args({static_cast<int>(kind), n});
}
BENCHMARK(BM_EpochBySize)->Apply(epoch_args)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
