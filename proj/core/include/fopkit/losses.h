#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fopkit/matrix.h"
#include "fopkit/model.h"
#include "fopkit/rng.h"

namespace fopkit {

enum class LossKind { kFopJoint, kCeOnly, kCenter, kGit, kContrastive, kTriplet };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& text);
const std::vector<LossKind>& all_loss_kinds();

struct LossConfig {
  LossKind kind = LossKind::kFopJoint;
  double alpha = 1.0;        // weight of the orthogonality term
  double alpha_c = 1.0;      // weight of the center term
  double alpha_g = 1.0;      // weight of the git term
  double margin = 0.6;       // contrastive / triplet
  double center_rate = 0.5;  // center update rate, in (0, 1]

  void validate() const;
};

/// Value, work counter and gradients of one loss evaluation. Gradients are
/// wrt the forward outputs the loss consumed; model::backward routes them into
/// the parameters.
struct LossOutput {
  double value = 0.0;
  std::uint64_t work = 0;   // pair / triplet terms evaluated
  bool degenerate = false;  // e.g. no valid triplets in the batch
  ForwardGrads grads;
};

/// Mean softmax cross-entropy of the identity classifier. work = B.
LossOutput ce_loss(const Matrix& logits, std::span<const int> labels);

/// Same-class and different-class cosine statistics of a batch.
struct OcTerms {
  double same_mean = 0.0;      // mean cos over same-identity pairs (0 if none)
  double diff_mean = 0.0;      // mean cos over different-identity pairs (0 if none)
  double diff_abs_mean = 0.0;  // mean |cos| over different-identity pairs
  double all_abs_mean = 0.0;   // mean |cos| over all pairs
  std::uint64_t same_pairs = 0;
  std::uint64_t diff_pairs = 0;
};

OcTerms oc_terms(const Matrix& fused, std::span<const int> labels);

/// 1 - mean_same cos + |mean_diff cos| over unordered pairs i < j. An empty
/// pair class contributes 0 to its term. work = B(B-1)/2.
LossOutput oc_loss(const Matrix& fused, std::span<const int> labels);

/// ce + alpha * oc. With alpha == 0 the orthogonality term is not evaluated,
/// so the result equals ce_loss exactly.
LossOutput fop_joint(const ForwardCache& cache, std::span<const int> labels, double alpha);

/// Per-identity feature centers for the center and git losses.
struct CenterBank {
  CenterBank() = default;
  CenterBank(std::size_t num_identities, std::size_t dim);

  Matrix centers;                      // C x d
  std::vector<std::uint64_t> touched;  // updates received per identity
};

/// 1/2 sum_i |l_i - c_{y_i}|^2. Gradient flows to l only. work = B.
LossOutput center_loss(const Matrix& fused, std::span<const int> labels, const CenterBank& bank);

/// c_y <- c_y - rate * mean_{i: y_i = y}(c_y - l_i) for each identity present.
void update_centers(CenterBank& bank, const Matrix& fused, std::span<const int> labels,
                    double rate);

/// sum_{i != j} 1 / (1 + |l_i - c_{y_j}|^2). Gradient flows to l only.
/// work = B(B-1).
LossOutput git_loss(const Matrix& fused, std::span<const int> labels, const CenterBank& bank);

/// Mean over row-aligned pairs of y D^2 + (1-y) max(0, m - D)^2 with
/// D = |u_i - v_i|. pair_labels are 1 (same identity) or 0. work = #pairs.
LossOutput contrastive_loss(const Matrix& u, const Matrix& v, std::span<const int> pair_labels,
                            double margin);

/// Per-epoch contrastive pair set: every instance contributes its genuine
/// (face_i, voice_i) pair and one negative (face_i, voice_j) with j drawn
/// uniformly from the different-identity instances. Candidates are gathered by
/// examining every unordered instance pair once.
struct ContrastivePairs {
  std::vector<std::size_t> face;
  std::vector<std::size_t> voice;
  std::vector<int> label;
  std::uint64_t examined = 0;  // n(n-1)/2
  // negative_of[i] is the voice partner of instance i, or npos if none exists.
  std::vector<std::size_t> negative_of;
};

ContrastivePairs build_contrastive_pairs(std::span<const int> labels, Rng& rng);

struct Triplet {
  std::size_t anchor;    // voice row
  std::size_t positive;  // face row, same identity as anchor
  std::size_t negative;  // face row, different identity
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletMining {
  std::vector<Triplet> triplets;
  std::uint64_t candidates = 0;  // candidate triplets examined
  bool no_triplets = false;      // fewer than two identities in the batch
};

/// For every (voice anchor, same-identity face positive) pair, selects the
/// different-identity face minimizing |v_a - u_n|^2 by scanning every
/// candidate. Ties go to the lowest batch index.
TripletMining mine_hard_negatives(const Matrix& u, const Matrix& v, std::span<const int> labels);

/// Mean over triplets of max(0, |v_a - u_p|^2 - |v_a - u_n|^2 + m).
/// work = triplets.size().
LossOutput triplet_loss(const Matrix& u, const Matrix& v, std::span<const Triplet> triplets,
                        double margin);

/// Sizes of the mini-batches an epoch over n instances is cut into. The last
/// partial batch is kept, except that a singleton remainder is merged into the
/// previous batch when merge_singleton is set.
std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch, bool merge_singleton);

/// Whether a loss configuration needs at least two instances per batch.
bool requires_pairs(const LossConfig& config);

/// Exact per-epoch work counter the trainer reports for `kind`:
///   ce_only      n                       (one CE term per instance)
///   fop_joint    n + sum_b B_b(B_b-1)/2  (CE terms + orthogonality pairs)
///   center       2n                      (CE terms + center terms)
///   git          2n + sum_b B_b(B_b-1)   (+ git push terms)
///   contrastive  n(n-1)/2                (pair-set candidates examined)
///   triplet      sum_b sum_a pos(a) neg(a), needs the labels in batch order
std::uint64_t count_work(LossKind kind, std::size_t batch_size, std::size_t n,
                         std::span<const int> labels_in_batch_order = {});

/// Closed-form number of candidate triplets for one batch.
std::uint64_t count_triplet_candidates(std::span<const int> batch_labels);

}  // namespace fopkit
