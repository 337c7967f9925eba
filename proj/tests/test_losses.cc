#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fopkit/errors.h"
#include "fopkit/losses.h"
#include "fopkit/ops.h"
#include "support/oracles.h"

namespace fopkit {
namespace {

using testing::cos_oracle;
using testing::max_fd_error;
using testing::random_labels;
using testing::random_matrix;
using testing::sqdist_oracle;

// ---- brute-force oracles ----

double oc_oracle(const Matrix& l, const std::vector<int>& y) {
  double same = 0, diff = 0;
  int ns = 0, nd = 0;
  for (std::size_t i = 0; i < l.rows(); ++i)
    for (std::size_t j = i + 1; j < l.rows(); ++j) {
      const double c = cos_oracle(l.row(i), l.row(j));
      if (y[i] == y[j]) {
        same += c;
        ++ns;
      } else {
        diff += c;
        ++nd;
      }
    }
  return 1.0 - (ns ? same / ns : 0.0) + std::abs(nd ? diff / nd : 0.0);
}

double center_oracle(const Matrix& l, const std::vector<int>& y, const Matrix& c) {
  double s = 0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += 0.5 * sqdist_oracle(l.row(i), c.row(y[i]));
  return s;
}

double git_oracle(const Matrix& l, const std::vector<int>& y, const Matrix& c) {
  double s = 0;
  for (std::size_t i = 0; i < l.rows(); ++i)
    for (std::size_t j = 0; j < l.rows(); ++j)
      if (i != j) s += 1.0 / (1.0 + sqdist_oracle(l.row(i), c.row(y[j])));
  return s;
}

// Exhaustive O(B^3) triplet scan: every (anchor, positive, negative) with the
// lowest-index hardest negative kept per (anchor, positive).
std::vector<Triplet> triplet_oracle(const Matrix& u, const Matrix& v, const std::vector<int>& y,
                                    std::uint64_t* examined) {
  std::vector<Triplet> out;
  *examined = 0;
  const std::size_t b = y.size();
  for (std::size_t a = 0; a < b; ++a)
    for (std::size_t p = 0; p < b; ++p) {
      if (y[p] != y[a]) continue;
      std::vector<std::pair<double, std::size_t>> cands;
      for (std::size_t n = 0; n < b; ++n) {
        if (y[n] == y[a]) continue;
        ++*examined;
        cands.emplace_back(sqdist_oracle(v.row(a), u.row(n)), n);
      }
      if (cands.empty()) continue;
      out.push_back({a, p, std::min_element(cands.begin(), cands.end())->second});
    }
  return out;
}

double triplet_value_oracle(const Matrix& u, const Matrix& v, const std::vector<Triplet>& t, double m) {
  double s = 0;
  for (const Triplet& x : t)
    s += std::max(0.0, sqdist_oracle(v.row(x.anchor), u.row(x.positive)) -
                           sqdist_oracle(v.row(x.anchor), u.row(x.negative)) + m);
  return s / static_cast<double>(t.size());
}

double contrastive_oracle(const Matrix& u, const Matrix& v, const std::vector<int>& y, double m) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = std::sqrt(sqdist_oracle(u.row(i), v.row(i)));
    s += y[i] ? d * d : std::pow(std::max(0.0, m - d), 2);
  }
  return s / static_cast<double>(y.size());
}

// ---- cross-entropy ----

TEST(CeLoss, HandValues) {
  EXPECT_NEAR(ce_loss(Matrix(1, 4), std::vector<int>{2}).value, std::log(4.0), 1e-15);
  EXPECT_NEAR(ce_loss(Matrix{{2, 0}}, std::vector<int>{0}).value, std::log1p(std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(ce_loss(Matrix{{2, 0}}, std::vector<int>{0}).value, 0.126928, 1e-6);
  EXPECT_LT(ce_loss(Matrix{{30, 0}}, std::vector<int>{0}).value, 1e-12);
  EXPECT_EQ(ce_loss(Matrix(5, 3), std::vector<int>{0, 1, 2, 0, 1}).work, 5u);
}

TEST(CeLoss, LabelOutOfRange) {
  EXPECT_THROW(ce_loss(Matrix(1, 2), std::vector<int>{2}), DataError);
}

// ---- orthogonality ----

TEST(OcLoss, HandValues) {
  EXPECT_NEAR(oc_loss(Matrix{{0.6, 0.8}, {0.6, 0.8}}, std::vector<int>{1, 1}).value, 0.0, 1e-15);
  EXPECT_NEAR(oc_loss(Matrix{{1, 0}, {0, 1}}, std::vector<int>{0, 1}).value, 1.0, 1e-15);
  // Only different-class pairs, anti-aligned: 1 - 0 + |-1|.
  EXPECT_NEAR(oc_loss(Matrix{{1, 0}, {-1, 0}}, std::vector<int>{0, 1}).value, 2.0, 1e-15);
}

TEST(OcLoss, BatchTooSmall) {
  EXPECT_THROW(oc_loss(Matrix{{1, 0}}, std::vector<int>{0}), DimensionError);
}

TEST(OcLoss, MatchesBruteForceAndFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng rng(seed);
    const std::size_t b = 6 + seed % 7;
    Matrix l = random_matrix(b, 5, rng);
    const auto y = random_labels(b, 3, rng);
    const LossOutput out = oc_loss(l, y);
    EXPECT_NEAR(out.value, oc_oracle(l, y), 1e-12);
    EXPECT_EQ(out.work, b * (b - 1) / 2);
    EXPECT_LE(max_fd_error(l, out.grads.fused, [&] { return oc_loss(l, y).value; }), 1e-4)
        << "seed " << seed;
  }
}

TEST(OcLoss, InvariantToRescalingOneEmbedding) {
  Rng rng(30);
  for (int t = 0; t < 10; ++t) {
    const Matrix l = random_matrix(8, 4, rng);
    const auto y = random_labels(8, 3, rng);
    const double base = oc_loss(l, y).value;
    for (double lambda : {0.5, 2.0, 10.0}) {
      Matrix s = l;
      for (double& x : s.row(t % 8)) x *= lambda;
      EXPECT_LE(std::abs(oc_loss(s, y).value - base), 1e-9);
    }
  }
}

TEST(OcTerms, CountsPairs) {
  const OcTerms t = oc_terms(Matrix{{1, 0}, {1, 0}, {0, 1}}, std::vector<int>{0, 0, 1});
  EXPECT_EQ(t.same_pairs, 1u);
  EXPECT_EQ(t.diff_pairs, 2u);
  EXPECT_NEAR(t.same_mean, 1.0, 1e-15);
  EXPECT_NEAR(t.diff_abs_mean, 0.0, 1e-15);
  EXPECT_NEAR(t.all_abs_mean, 1.0 / 3.0, 1e-15);
}

// ---- joint ----

ForwardCache fake_cache(Rng& rng, std::size_t b, std::size_t d, std::size_t c) {
  ForwardCache fc;
  fc.fused = random_matrix(b, d, rng);
  fc.logits = random_matrix(b, c, rng);
  return fc;
}

TEST(FopJoint, AlphaZeroIsCeBitExactly) {
  Rng rng(31);
  const ForwardCache fc = fake_cache(rng, 7, 4, 3);
  const auto y = random_labels(7, 3, rng);
  const LossOutput j = fop_joint(fc, y, 0.0);
  const LossOutput c = ce_loss(fc.logits, y);
  EXPECT_EQ(j.value, c.value);
  EXPECT_EQ(j.grads.logits, c.grads.logits);
  EXPECT_TRUE(j.grads.fused.empty() || j.grads.fused == Matrix(7, 4));
}

TEST(FopJoint, SumOfParts) {
  Rng rng(32);
  for (double alpha : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    ForwardCache fc = fake_cache(rng, 9, 4, 3);
    const auto y = random_labels(9, 3, rng);
    const LossOutput j = fop_joint(fc, y, alpha);
    EXPECT_NEAR(j.value, ce_loss(fc.logits, y).value + alpha * oc_loss(fc.fused, y).value, 1e-14);
    EXPECT_LE(max_fd_error(fc.fused, j.grads.fused, [&] { return fop_joint(fc, y, alpha).value; }), 1e-4);
    EXPECT_LE(max_fd_error(fc.logits, j.grads.logits, [&] { return fop_joint(fc, y, alpha).value; }), 1e-4);
  }
}

TEST(LossConfig, Defaults) {
  const LossConfig c;
  EXPECT_EQ(c.kind, LossKind::kFopJoint);
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.margin, 0.6);
  EXPECT_EQ(c.center_rate, 0.5);
  LossConfig bad;
  bad.alpha = -0.1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = LossConfig{};
  bad.kind = LossKind::kTriplet;
  bad.margin = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = LossConfig{};
  bad.kind = LossKind::kCenter;
  bad.center_rate = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(LossKind, RoundTripNames) {
  for (LossKind k : all_loss_kinds()) EXPECT_EQ(parse_loss_kind(to_string(k)), k);
  EXPECT_THROW(parse_loss_kind("hinge"), ConfigError);
}

// ---- center / git ----

TEST(CenterLoss, HandValues) {
  CenterBank bank(2, 2);
  bank.centers = Matrix{{1, 1}, {0, 0}};
  EXPECT_EQ(center_loss(Matrix{{1, 1}, {0, 0}}, std::vector<int>{0, 1}, bank).value, 0.0);
  EXPECT_NEAR(center_loss(Matrix{{0, 2}}, std::vector<int>{1}, bank).value, 2.0, 1e-15);
}

TEST(CenterLoss, MatchesBruteForceAndFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 40);
    CenterBank bank(4, 3);
    bank.centers = random_matrix(4, 3, rng);
    Matrix l = random_matrix(10, 3, rng);
    const auto y = random_labels(10, 4, rng);
    const LossOutput out = center_loss(l, y, bank);
    EXPECT_NEAR(out.value, center_oracle(l, y, bank.centers), 1e-12);
    EXPECT_LE(max_fd_error(l, out.grads.fused, [&] { return center_loss(l, y, bank).value; }), 1e-4);
  }
}

TEST(CenterLoss, UpdateMovesTowardBatchMean) {
  CenterBank bank(2, 2);
  const Matrix l{{2, 0}, {4, 0}, {9, 9}};
  update_centers(bank, l, std::vector<int>{0, 0, 1}, 0.5);
  // Identity 0: residual mean (0 - 3) -> c = 0 - 0.5 * (-3) = 1.5.
  EXPECT_NEAR(bank.centers(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(bank.centers(1, 1), 4.5, 1e-15);
  EXPECT_EQ(bank.touched[0], 1u);
  update_centers(bank, l, std::vector<int>{1, 1, 1}, 1.0);
  EXPECT_EQ(bank.touched[0], 1u);
  EXPECT_NEAR(bank.centers(1, 0), 5.0, 1e-15);
}

TEST(GitLoss, HandValues) {
  CenterBank bank(2, 2);
  EXPECT_EQ(git_loss(Matrix{{1, 1}}, std::vector<int>{0}, bank).value, 0.0);
  bank.centers = Matrix{{1e4, 0}, {0, 0}};
  const LossOutput far = git_loss(Matrix{{0, 0}, {0, 0}}, std::vector<int>{1, 0}, bank);
  // Terms: l_0 vs c_0 (far) and l_1 vs c_1 (distance 0, value 1).
  EXPECT_NEAR(far.value, 1.0, 1e-7);
  EXPECT_LT(1.0 / (1.0 + 1e8), 1e-7);
}

TEST(GitLoss, MatchesBruteForceAndFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 50);
    CenterBank bank(2, 3);
    bank.centers = random_matrix(2, 3, rng);
    Matrix l = random_matrix(4, 3, rng);
    const auto y = random_labels(4, 2, rng);
    const LossOutput out = git_loss(l, y, bank);
    EXPECT_NEAR(out.value, git_oracle(l, y, bank.centers), 1e-12);
    EXPECT_EQ(out.work, 12u);
    EXPECT_LE(max_fd_error(l, out.grads.fused, [&] { return git_loss(l, y, bank).value; }), 1e-4);
  }
}

// ---- contrastive ----

TEST(ContrastiveLoss, HandValues) {
  const Matrix a{{0.6, 0.8}};
  EXPECT_EQ(contrastive_loss(a, a, std::vector<int>{1}, 0.6).value, 0.0);
  EXPECT_NEAR(contrastive_loss(a, a, std::vector<int>{0}, 0.6).value, 0.36, 1e-15);
  EXPECT_EQ(contrastive_loss(Matrix{{1, 0}}, Matrix{{-1, 0}}, std::vector<int>{0}, 0.6).value, 0.0);
  EXPECT_THROW(contrastive_loss(a, a, std::vector<int>{1}, 0.0), ConfigError);
  EXPECT_THROW(contrastive_loss(a, a, std::vector<int>{1}, -1.0), ConfigError);
}

TEST(ContrastiveLoss, MatchesOracleAndFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 60);
    Matrix u = ops::l2_normalize(random_matrix(8, 4, rng));
    Matrix v = ops::l2_normalize(random_matrix(8, 4, rng));
    std::vector<int> y(8);
    for (auto& x : y) x = static_cast<int>(uniform_index(rng, 2));
    const double m = 1.2;
    const LossOutput out = contrastive_loss(u, v, y, m);
    EXPECT_NEAR(out.value, contrastive_oracle(u, v, y, m), 1e-12);
    EXPECT_EQ(out.work, 8u);
    EXPECT_LE(max_fd_error(u, out.grads.u, [&] { return contrastive_loss(u, v, y, m).value; }), 1e-4);
    EXPECT_LE(max_fd_error(v, out.grads.v, [&] { return contrastive_loss(u, v, y, m).value; }), 1e-4);
  }
}

TEST(ContrastivePairs, OnePositiveAndOneNegativePerInstance) {
  Rng rng(61);
  const auto y = random_labels(100, 5, rng);
  Rng pair_rng(62);
  const ContrastivePairs p = build_contrastive_pairs(y, pair_rng);
  EXPECT_EQ(p.examined, 4950u);
  EXPECT_EQ(p.label.size(), 200u);
  EXPECT_EQ(std::count(p.label.begin(), p.label.end(), 1), 100);
  for (std::size_t k = 0; k < p.label.size(); ++k) {
    const bool same = y[p.face[k]] == y[p.voice[k]];
    EXPECT_EQ(same, p.label[k] == 1);
  }
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NE(y[p.negative_of[i]], y[i]);
}

// ---- triplet ----

TEST(TripletLoss, HandValues) {
  const Matrix v{{1, 0}};
  const Matrix u{{1, 0}, {1, 0}};
  const std::vector<Triplet> t{{0, 0, 1}};
  EXPECT_NEAR(triplet_loss(u, v, t, 0.6).value, 0.6, 1e-15);
  const Matrix far{{1, 0}, {-1, 0}};  // d(a,n)^2 = 4 >= 0 + 0.6
  EXPECT_EQ(triplet_loss(far, v, t, 0.6).value, 0.0);
}

TEST(TripletMining, SingleIdentityFlagsNoTriplets) {
  Rng rng(70);
  const Matrix u = random_matrix(4, 3, rng), v = random_matrix(4, 3, rng);
  const TripletMining m = mine_hard_negatives(u, v, std::vector<int>{2, 2, 2, 2});
  EXPECT_TRUE(m.no_triplets);
  EXPECT_TRUE(m.triplets.empty());
  const LossOutput out = triplet_loss(u, v, m.triplets, 0.6);
  EXPECT_EQ(out.value, 0.0);
  EXPECT_TRUE(out.degenerate);
}

TEST(TripletMining, MatchesExhaustiveScan) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng rng(seed + 71);
    Matrix u = random_matrix(8, 4, rng), v = random_matrix(8, 4, rng);
    const auto y = random_labels(8, 3, rng);
    std::uint64_t examined = 0;
    const auto expected = triplet_oracle(u, v, y, &examined);
    const TripletMining m = mine_hard_negatives(u, v, y);
    EXPECT_EQ(m.triplets, expected);
    EXPECT_EQ(m.candidates, examined);
    EXPECT_EQ(m.candidates, count_triplet_candidates(y));
    const LossOutput out = triplet_loss(u, v, m.triplets, 0.6);
    EXPECT_NEAR(out.value, triplet_value_oracle(u, v, expected, 0.6), 1e-12);
    EXPECT_LE(max_fd_error(u, out.grads.u, [&] { return triplet_loss(u, v, m.triplets, 0.6).value; }), 1e-4);
    EXPECT_LE(max_fd_error(v, out.grads.v, [&] { return triplet_loss(u, v, m.triplets, 0.6).value; }), 1e-4);
  }
}

TEST(TripletMining, TieBreakIsLowestIndex) {
  const Matrix u{{0, 0}, {1, 0}, {1, 0}};
  const Matrix v{{0, 0}, {0, 0}, {0, 0}};
  const TripletMining m = mine_hard_negatives(u, v, std::vector<int>{0, 1, 1});
  ASSERT_FALSE(m.triplets.empty());
  EXPECT_EQ(m.triplets[0].negative, 1u);
}

TEST(TripletMining, PermutationInvariant) {
  Rng rng(80);
  for (int t = 0; t < 10; ++t) {
    const Matrix u = random_matrix(9, 3, rng), v = random_matrix(9, 3, rng);
    const auto y = random_labels(9, 3, rng);
    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    seeded_shuffle(perm, rng);
    std::vector<int> yp(9);
    for (std::size_t i = 0; i < 9; ++i) yp[i] = y[perm[i]];
    const auto a = mine_hard_negatives(u, v, y);
    const auto b = mine_hard_negatives(gather_rows(u, perm), gather_rows(v, perm), yp);
    // Map the permuted triplets back to original indices and compare as sets.
    std::vector<Triplet> mapped;
    for (const Triplet& x : b.triplets) mapped.push_back({perm[x.anchor], perm[x.positive], perm[x.negative]});
    auto key = [](const Triplet& x) { return std::tuple(x.anchor, x.positive, x.negative); };
    auto less = [&](const Triplet& p, const Triplet& q) { return key(p) < key(q); };
    auto sa = a.triplets;
    std::sort(sa.begin(), sa.end(), less);
    std::sort(mapped.begin(), mapped.end(), less);
    EXPECT_EQ(sa, mapped);  // continuous random data: no ties
  }
}

// ---- batching and work ----

TEST(BatchSizes, KeepsPartialAndMergesSingleton) {
  EXPECT_EQ(batch_sizes(256, 128, true), (std::vector<std::size_t>{128, 128}));
  EXPECT_EQ(batch_sizes(10, 4, false), (std::vector<std::size_t>{4, 4, 2}));
  EXPECT_EQ(batch_sizes(9, 4, false), (std::vector<std::size_t>{4, 4, 1}));
  EXPECT_EQ(batch_sizes(9, 4, true), (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(batch_sizes(1, 4, true), (std::vector<std::size_t>{1}));
  EXPECT_THROW(batch_sizes(4, 0, false), ConfigError);
}

TEST(CountWork, ClosedForms) {
  EXPECT_EQ(count_work(LossKind::kCeOnly, 32, 100), 100u);
  EXPECT_EQ(count_work(LossKind::kContrastive, 32, 100), 4950u);
  EXPECT_EQ(count_work(LossKind::kCenter, 32, 100), 200u);
  // 100 = 32 + 32 + 32 + 4
  EXPECT_EQ(count_work(LossKind::kFopJoint, 32, 100), 100u + 3 * 496 + 6);
  EXPECT_EQ(count_work(LossKind::kGit, 32, 100), 200u + 3 * 992 + 12);
  EXPECT_THROW(count_work(LossKind::kTriplet, 32, 100), ConfigError);
}

TEST(CountWork, BalancedTripletBatchMatchesEnumeration) {
  std::vector<int> y(32);
  for (std::size_t i = 0; i < 32; ++i) y[i] = static_cast<int>(i % 4);
  Rng rng(90);
  const Matrix u = random_matrix(32, 3, rng), v = random_matrix(32, 3, rng);
  std::uint64_t examined = 0;
  triplet_oracle(u, v, y, &examined);
  EXPECT_EQ(examined, 4u * 8 * 8 * 24);
  EXPECT_EQ(count_work(LossKind::kTriplet, 32, 32, y), examined);
  EXPECT_EQ(mine_hard_negatives(u, v, y).candidates, examined);
}

TEST(CountWork, TripletCandidatesGrowCubically) {
  auto balanced = [](std::size_t b) {
    std::vector<int> y(b);
    for (std::size_t i = 0; i < b; ++i) y[i] = static_cast<int>(i % 4);
    return count_triplet_candidates(y);
  };
  // k = b/4 per identity: 4 k^2 (b - k) = (3/16) b^3.
  for (std::size_t b : {8u, 16u, 32u, 64u}) EXPECT_EQ(balanced(b), 3 * b * b * b / 16);
}

TEST(LossProperty, ValuesNonNegative) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 300);
    const std::size_t b = 4 + seed % 6;
    const auto y = random_labels(b, 3, rng);
    const Matrix l = random_matrix(b, 4, rng);
    const Matrix u = ops::l2_normalize(random_matrix(b, 4, rng));
    const Matrix v = ops::l2_normalize(random_matrix(b, 4, rng));
    CenterBank bank(3, 4);
    bank.centers = random_matrix(3, 4, rng);
    EXPECT_GE(ce_loss(random_matrix(b, 3, rng), y).value, 0.0);
    EXPECT_GE(oc_loss(l, y).value, 0.0);
    EXPECT_GE(center_loss(l, y, bank).value, 0.0);
    EXPECT_GE(git_loss(l, y, bank).value, 0.0);
    std::vector<int> pair_y(b);
    for (std::size_t i = 0; i < b; ++i) pair_y[i] = y[i] == 0 ? 1 : 0;
    EXPECT_GE(contrastive_loss(u, v, pair_y, 0.6).value, 0.0);
    EXPECT_GE(triplet_loss(u, v, mine_hard_negatives(u, v, y).triplets, 0.6).value, 0.0);
  }
}

}  // namespace
}  // namespace fopkit
