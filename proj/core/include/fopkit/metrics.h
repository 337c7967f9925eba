#pragma once

#include <span>
#include <vector>

namespace fopkit {

struct RocPoint {
  double far = 0.0;  // false accept rate
  double tar = 0.0;  // true accept rate
  double threshold = 0.0;  // accept when score >= threshold
};

/// Operating points from accepting nothing (0,0) to accepting everything
/// (1,1), one per distinct score, FAR non-decreasing.
struct RocCurve {
  std::vector<RocPoint> points;
};

// `labels` holds 1 for genuine and 0 for impostor trials. Every function
// throws NumericError when either class is absent.

RocCurve compute_roc(std::span<const double> scores, std::span<const int> labels);

/// Mann-Whitney statistic: fraction of (genuine, impostor) pairs where the
/// genuine score is higher, ties counting 1/2.
double compute_auc(std::span<const double> scores, std::span<const int> labels);

/// Error rate where FAR = FRR, linearly interpolated between the two adjacent
/// operating points where FAR - FRR changes sign.
double compute_eer(std::span<const double> scores, std::span<const int> labels);

}  // namespace fopkit
