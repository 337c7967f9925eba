#include "fopkit/metrics.h"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "fopkit/errors.h"

namespace fopkit {
namespace {

// Scores grouped into distinct values, descending, with per-group counts.
struct ScoreGroup {
  double score;
  std::uint64_t genuine;
  std::uint64_t impostor;
};

struct Sweep {
  std::vector<ScoreGroup> groups;
  std::uint64_t genuine = 0;
  std::uint64_t impostor = 0;
};

Sweep sweep(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError(std::to_string(scores.size()) + " scores for " +
                         std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  Sweep s;
  for (std::size_t i : order) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("trial label must be 0 or 1, got " + std::to_string(labels[i]));
    }
    if (s.groups.empty() || s.groups.back().score != scores[i]) s.groups.push_back({scores[i], 0, 0});
    if (labels[i] == 1) {
      ++s.groups.back().genuine;
      ++s.genuine;
    } else {
      ++s.groups.back().impostor;
      ++s.impostor;
    }
  }
  if (s.genuine == 0 || s.impostor == 0) {
    throw NumericError("metric undefined: need both genuine and impostor trials (" +
                       std::to_string(s.genuine) + " genuine, " + std::to_string(s.impostor) +
                       " impostor)");
  }
  return s;
}

}  // namespace

RocCurve compute_roc(std::span<const double> scores, std::span<const int> labels) {
  const Sweep s = sweep(scores, labels);
  RocCurve roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0, fp = 0;
  for (const auto& g : s.groups) {
    tp += g.genuine;
    fp += g.impostor;
    roc.points.push_back({static_cast<double>(fp) / s.impostor, static_cast<double>(tp) / s.genuine, g.score});
  }
  return roc;
}

double compute_auc(std::span<const double> scores, std::span<const int> labels) {
  const Sweep s = sweep(scores, labels);
  // Sweep from the lowest score upwards, counting impostors strictly below.
  // Twice the numerator is an integer, so the sum is exact.
  std::uint64_t twice_correct = 0;
  std::uint64_t impostors_below = 0;
  for (auto it = s.groups.rbegin(); it != s.groups.rend(); ++it) {
    twice_correct += 2 * it->genuine * impostors_below + it->genuine * it->impostor;
    impostors_below += it->impostor;
  }
  return static_cast<double>(twice_correct) / 2.0 /
         (static_cast<double>(s.genuine) * static_cast<double>(s.impostor));
}

double compute_eer(std::span<const double> scores, std::span<const int> labels) {
  const Sweep s = sweep(scores, labels);
  // Operating points from "accept nothing" (FAR 0, FRR 1) downwards in threshold.
  std::uint64_t tp = 0, fp = 0;
  double prev_far = 0.0, prev_frr = 1.0;
  for (const auto& g : s.groups) {
    tp += g.genuine;
    fp += g.impostor;
    const double far = static_cast<double>(fp) / s.impostor;
    const double frr = 1.0 - static_cast<double>(tp) / s.genuine;
    const double d0 = prev_far - prev_frr;
    const double d1 = far - frr;
    if (d0 == 0.0) return prev_far;
    if (d1 >= 0.0) {
      if (d1 == 0.0) return far;
      const double t = d0 / (d0 - d1);
      return prev_far + t * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  return prev_far;  // unreachable: the last point has FAR 1, FRR 0
}

}  // namespace fopkit
