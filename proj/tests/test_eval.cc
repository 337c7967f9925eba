#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "fopkit/errors.h"
#include "fopkit/eval.h"
#include "fopkit/metrics.h"
#include "fopkit/synth.h"
#include "fopkit/trials.h"
#include "support/oracles.h"

namespace fopkit {
namespace {

using testing::binomial_halfwidth99;
using testing::brute_force_auc;
using testing::random_matrix;
using testing::sweep_eer;

// ---- metrics ----

TEST(Auc, FourTrialExample) {
  const std::vector<double> s{0.9, 0.4, 0.6, 0.1};
  const std::vector<int> y{1, 1, 0, 0};
  EXPECT_EQ(compute_auc(s, y), 0.75);
  EXPECT_NEAR(compute_eer(s, y), sweep_eer(s, y), 1e-9);
}

TEST(Auc, PerfectAndAntiCorrelated) {
  const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
  EXPECT_EQ(compute_auc(s, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(compute_eer(s, std::vector<int>{1, 1, 0, 0}), 0.0);
  EXPECT_EQ(compute_auc(s, std::vector<int>{0, 0, 1, 1}), 0.0);
  EXPECT_EQ(compute_eer(s, std::vector<int>{0, 0, 1, 1}), 1.0);
}

TEST(Auc, TiesCountHalf) {
  EXPECT_EQ(compute_auc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}), 0.5);
}

TEST(Metrics, SingleClassIsUndefined) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(compute_auc(s, std::vector<int>{1, 1}), NumericError);
  EXPECT_THROW(compute_eer(s, std::vector<int>{0, 0}), NumericError);
  EXPECT_THROW(compute_roc(s, std::vector<int>{0, 0}), NumericError);
}

TEST(Roc, EndpointsAndMonotone) {
  Rng rng(1);
  std::vector<double> s(200);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < s.size(); ++i) {
    y[i] = static_cast<int>(i % 2);
    s[i] = std::round(10 * uniform01(rng)) / 10 + 0.1 * y[i];  // many ties
  }
  const RocCurve roc = compute_roc(s, y);
  ASSERT_GE(roc.points.size(), 2u);
  EXPECT_EQ(roc.points.front().far, 0.0);
  EXPECT_EQ(roc.points.front().tar, 0.0);
  EXPECT_EQ(roc.points.front().threshold, std::numeric_limits<double>::infinity());
  EXPECT_EQ(roc.points.back().far, 1.0);
  EXPECT_EQ(roc.points.back().tar, 1.0);
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    EXPECT_GE(roc.points[k].far, roc.points[k - 1].far);
    EXPECT_GE(roc.points[k].tar, roc.points[k - 1].tar);
  }
}

TEST(MetricProperty, AucEqualsPairCountingAndEerEqualsSweep) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + uniform_index(rng, 999);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const bool coarse = seed % 3 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(uniform_index(rng, 2));
      s[i] = coarse ? static_cast<double>(uniform_index(rng, 7)) : standard_normal(rng) + 0.7 * y[i];
    }
    EXPECT_EQ(compute_auc(s, y), brute_force_auc(s, y)) << "seed " << seed;
    EXPECT_NEAR(compute_eer(s, y), sweep_eer(s, y), 1e-9) << "seed " << seed;
  }
}

TEST(MetricProperty, MonotoneTransformsKeepAuc) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> s(300), e(300), a(300);
    std::vector<int> y(300);
    for (std::size_t i = 0; i < s.size(); ++i) {
      y[i] = static_cast<int>(i % 2);
      s[i] = standard_normal(rng) + 0.5 * y[i];
      e[i] = std::exp(s[i]);
      a[i] = 3.0 * s[i] - 7.0;
    }
    const double base = compute_auc(s, y);
    EXPECT_LE(std::abs(compute_auc(e, y) - base), 1e-12);
    EXPECT_LE(std::abs(compute_auc(a, y) - base), 1e-12);
  }
}

TEST(MetricProperty, LabelSwapComplementsAuc) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s(101);
    std::vector<int> y(101), swapped(101);
    for (std::size_t i = 0; i < s.size(); ++i) {
      y[i] = static_cast<int>(i % 2);
      swapped[i] = 1 - y[i];
      s[i] = static_cast<double>(uniform_index(rng, 20));
    }
    EXPECT_DOUBLE_EQ(compute_auc(s, swapped), 1.0 - compute_auc(s, y));
    const double eer = compute_eer(s, y);
    EXPECT_GE(eer, 0.0);
    EXPECT_LE(eer, 1.0);
  }
}

TEST(MetricProperty, RandomScoresGiveChanceAuc) {
  Rng rng(7);
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = uniform01(rng);
    y[i] = static_cast<int>(uniform_index(rng, 2));
  }
  EXPECT_NEAR(compute_auc(s, y), 0.5, 0.02);
}

// ---- scoring ----

TEST(Scoring, EmbeddingScorers) {
  const std::vector<double> a{0.6, 0.8}, b{0.8, -0.6};
  EXPECT_NEAR(score_embeddings(a, a, ScorerKind::kCosine).value, 1.0, 1e-15);
  EXPECT_NEAR(score_embeddings(a, b, ScorerKind::kCosine).value, 0.0, 1e-15);
  EXPECT_NEAR(score_embeddings(a, b, ScorerKind::kNegEuclidean).value, -std::sqrt(2.0), 1e-15);
  const std::vector<double> z{0, 0};
  const Score d = score_embeddings(z, a, ScorerKind::kCosine);
  EXPECT_EQ(d.value, 0.0);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(parse_scorer_kind(to_string(ScorerKind::kNegEuclidean)), ScorerKind::kNegEuclidean);
  EXPECT_THROW(parse_scorer_kind("prototype"), ConfigError);
}

// Independent recomputation: affine, normalize and cosine with plain loops.
double recompute_score(std::span<const double> face, std::span<const double> voice, const FopParams& p) {
  auto project = [](std::span<const double> x, const Parameter& w, const Parameter& b) {
    std::vector<double> out(w.value.cols());
    for (std::size_t j = 0; j < out.size(); ++j) {
      double s = b.value(0, j);
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w.value(i, j);
      out[j] = s;
    }
    return out;
  };
  const auto u = project(face, p.face_w, p.face_b);
  const auto v = project(voice, p.voice_w, p.voice_b);
  return testing::cos_oracle(u, v);
}

struct Fixture {
  SyntheticData data;
  FopParams params;
  std::vector<std::string> ids;
};

Fixture make_fixture(double shift = 0.0) {
  SyntheticSpec spec;
  spec.identities = 12;
  spec.per_identity = 6;
  spec.language_shift = shift;
  Fixture f{synthesize(spec), {}, {}};
  FopConfig c;
  c.face_dim = spec.face_dim;
  c.voice_dim = spec.voice_dim;
  c.embed_dim = 16;
  c.num_identities = spec.identities;
  f.params = FopParams::init(c, 4);
  Rng rng(9);
  f.params.face_b.value = random_matrix(1, 16, rng, 0.1);
  for (const Record& r : f.data.face.records()) f.ids.push_back(r.id);
  return f;
}

TEST(Scoring, PairScoresMatchRecomputation) {
  const Fixture f = make_fixture();
  const TrialScorer scorer(f.data.face, f.data.voice, f.params, ScorerKind::kCosine, 3);
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const Record& a = f.data.face.at(uniform_index(rng, f.data.face.size()));
    const Record& b = f.data.voice.at(uniform_index(rng, f.data.voice.size()));
    const double direct = score_pair(a.vec, b.vec, f.params).value;
    EXPECT_EQ(scorer.score(a.id, b.id).value, direct);
    EXPECT_NEAR(direct, recompute_score(a.vec, b.vec, f.params), 1e-12);
  }
}

TEST(Scoring, ThreadCountDoesNotChangeEmbeddings) {
  const Fixture f = make_fixture();
  const TrialScorer one(f.data.face, f.data.voice, f.params, ScorerKind::kCosine, 1);
  const TrialScorer four(f.data.face, f.data.voice, f.params, ScorerKind::kCosine, 4);
  EXPECT_EQ(one.face_embeddings(), four.face_embeddings());
  EXPECT_EQ(one.voice_embeddings(), four.voice_embeddings());
}

TEST(Scoring, ThreadsFromEnvironment) {
  setenv("FOPKIT_THREADS", "3", 1);
  EXPECT_EQ(eval_threads(), 3u);
  setenv("FOPKIT_THREADS", "zero", 1);
  EXPECT_THROW(eval_threads(), ConfigError);
  unsetenv("FOPKIT_THREADS");
  EXPECT_GE(eval_threads(), 1u);
}

TEST(Verification, ReportMatchesMetricsOnScores) {
  const Fixture f = make_fixture();
  const auto trials = build_verification_trials(f.data.face, f.data.voice, f.ids, 300, 11).trials;
  const TrialScorer scorer(f.data.face, f.data.voice, f.params);
  const VerificationScores vs = score_verification(trials, scorer);
  const VerificationReport r = evaluate_verification(trials, scorer);
  EXPECT_EQ(r.trials, 300u);
  EXPECT_EQ(r.genuine, 150u);
  EXPECT_EQ(r.impostor, 150u);
  EXPECT_EQ(r.auc, brute_force_auc(vs.scores, vs.labels));
  EXPECT_NEAR(r.eer, sweep_eer(vs.scores, vs.labels), 1e-9);
}

// ---- strata ----

EmbeddingStore annotated_store(Modality m, const std::vector<Attributes>& attrs) {
  EmbeddingStore s(m, 2);
  for (std::size_t i = 0; i < attrs.size(); ++i)
    s.add({"i" + std::to_string(i), static_cast<std::int32_t>(i), attrs[i], {1.0, 0.0}});
  return s;
}

TEST(Stratify, AllSameGenderKeepsEverything) {
  std::vector<Attributes> a(4);
  for (auto& x : a) x.gender = 0;
  const EmbeddingStore face = annotated_store(Modality::kFace, a);
  const EmbeddingStore voice = annotated_store(Modality::kVoice, a);
  std::vector<VerificationTrial> trials;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) trials.push_back({"i" + std::to_string(i), "i" + std::to_string(j), i == j});
  const StratumSubset s = stratify(trials, face, voice, StratumKey::kGender);
  EXPECT_EQ(s.indices.size(), trials.size());
  // Nationality is unannotated: everything excluded and counted.
  const StratumSubset n = stratify(trials, face, voice, StratumKey::kNationality);
  EXPECT_TRUE(n.empty());
  EXPECT_EQ(n.missing_annotations, trials.size());
}

TEST(Stratify, DisjointAttributesGiveEmptySubset) {
  std::vector<Attributes> fa(2), va(2);
  fa[0].gender = fa[1].gender = 0;
  va[0].gender = va[1].gender = 1;
  const std::vector<VerificationTrial> trials{{"i0", "i0", true}, {"i1", "i0", false}};
  const StratumSubset s = stratify(trials, annotated_store(Modality::kFace, fa),
                                   annotated_store(Modality::kVoice, va), StratumKey::kGender);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.missing_annotations, 0u);
}

TEST(Stratify, MatchesBruteForceFilter) {
  Rng rng(12);
  std::vector<Attributes> fa(30), va(30);
  auto draw = [&](Attributes& a) {
    auto pick = [&](int k) { return uniform_index(rng, 10) == 0 ? kUnknownAttribute : static_cast<std::int32_t>(uniform_index(rng, k)); };
    a.gender = pick(2);
    a.nationality = pick(3);
    a.age_group = pick(5);
  };
  for (auto& a : fa) draw(a);
  for (auto& a : va) draw(a);
  const EmbeddingStore face = annotated_store(Modality::kFace, fa);
  const EmbeddingStore voice = annotated_store(Modality::kVoice, va);
  std::vector<VerificationTrial> trials;
  for (int t = 0; t < 500; ++t) {
    trials.push_back({"i" + std::to_string(uniform_index(rng, 30)), "i" + std::to_string(uniform_index(rng, 30)),
                      t % 2 == 0});
  }
  for (StratumKey key : all_stratum_keys()) {
    std::vector<std::size_t> expected;
    std::size_t missing = 0;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const Attributes& a = fa[std::stoul(trials[t].face_id.substr(1))];
      const Attributes& b = va[std::stoul(trials[t].voice_id.substr(1))];
      std::vector<std::pair<int, int>> fields;
      if (key == StratumKey::kGender || key == StratumKey::kGNA) fields.emplace_back(a.gender, b.gender);
      if (key == StratumKey::kNationality || key == StratumKey::kGNA) fields.emplace_back(a.nationality, b.nationality);
      if (key == StratumKey::kAge || key == StratumKey::kGNA) fields.emplace_back(a.age_group, b.age_group);
      bool unknown = false, same = true;
      for (auto [x, y] : fields) {
        unknown |= x == kUnknownAttribute || y == kUnknownAttribute;
        same &= x == y;
      }
      if (unknown) ++missing;
      else if (same) expected.push_back(t);
    }
    const StratumSubset s = stratify(trials, face, voice, key);
    EXPECT_EQ(s.indices, expected) << to_string(key);
    EXPECT_EQ(s.missing_annotations, missing) << to_string(key);
  }
}

TEST(Stratify, KeyNames) {
  for (StratumKey k : all_stratum_keys()) EXPECT_EQ(parse_stratum_key(to_string(k)), k);
  EXPECT_THROW(parse_stratum_key("X"), ConfigError);
}

TEST(Strata, SingleClassSubsetReportsUndefined) {
  std::vector<Attributes> a(3);
  a[0].gender = 0;
  a[1].gender = 1;
  a[2].gender = 0;
  const EmbeddingStore face = annotated_store(Modality::kFace, a);
  const EmbeddingStore voice = annotated_store(Modality::kVoice, a);
  FopConfig c;
  c.face_dim = c.voice_dim = c.embed_dim = 2;
  c.num_identities = 3;
  const FopParams p = FopParams::init(c, 1);
  const TrialScorer scorer(face, voice, p);
  // Same-gender trials are all genuine.
  const std::vector<VerificationTrial> trials{{"i0", "i0", true}, {"i1", "i0", false}, {"i2", "i2", true}};
  const std::vector<StratumKey> keys{StratumKey::kGender};
  const auto reports = evaluate_strata(trials, scorer, keys);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].trials, 2u);
  EXPECT_FALSE(reports[0].report.has_value());
  EXPECT_FALSE(reports[0].note.empty());
}

// ---- matching ----

TEST(Matching, PerfectScorerIsAlwaysRight) {
  const Fixture f = make_fixture();
  const auto trials = build_matching_trials(f.data.face, f.data.voice, f.ids, 4, 200, 13).trials;
  const MatchingReport r = match_1_to_n(trials, f.data.face, f.data.voice,
                                        [](const MatchingTrial& t, std::size_t pos) { return pos == t.true_pos ? 1.0 : 0.0; });
  ASSERT_NE(r.find(4), nullptr);
  EXPECT_EQ(r.find(4)->accuracy, 1.0);
  EXPECT_EQ(r.find(4)->ties, 0u);
  EXPECT_TRUE(r.rejected.empty());
}

TEST(Matching, ConstantScorerTiesToFirstPosition) {
  const Fixture f = make_fixture();
  const auto trials = build_matching_trials(f.data.face, f.data.voice, f.ids, 3, 300, 14).trials;
  const MatchingReport r = match_1_to_n(trials, f.data.face, f.data.voice,
                                        [](const MatchingTrial&, std::size_t) { return 0.0; });
  std::size_t at_zero = 0;
  for (const auto& t : trials) at_zero += t.true_pos == 0;
  EXPECT_EQ(r.find(3)->correct, at_zero);
  EXPECT_EQ(r.find(3)->ties, trials.size());
}

TEST(Matching, RandomScorerConvergesToChance) {
  const Fixture f = make_fixture();
  for (std::size_t n_c : {2u, 10u}) {
    const auto trials = build_matching_trials(f.data.face, f.data.voice, f.ids, n_c, 10000, 15 + n_c).trials;
    Rng rng(16);
    const MatchingReport r = match_1_to_n(trials, f.data.face, f.data.voice,
                                          [&](const MatchingTrial&, std::size_t) { return uniform01(rng); });
    const double p = 1.0 / static_cast<double>(n_c);
    EXPECT_NEAR(r.find(n_c)->accuracy, p, std::max(0.02, binomial_halfwidth99(p, 10000))) << n_c;
  }
}

TEST(Matching, MalformedGalleriesRejectedByIndex) {
  const Fixture f = make_fixture();
  auto trials = build_matching_trials(f.data.face, f.data.voice, f.ids, 3, 5, 17).trials;
  trials[1].true_pos = 7;                 // out of range
  trials[3].gallery[(trials[3].true_pos + 1) % 3] = trials[3].gallery[trials[3].true_pos];  // duplicate match
  trials[4].gallery[0] = "nobody";        // unknown id
  const MatchingReport r = match_1_to_n(trials, f.data.face, f.data.voice,
                                        [](const MatchingTrial&, std::size_t) { return 0.0; });
  EXPECT_EQ(r.rejected, (std::vector<std::size_t>{1, 3, 4}));
  EXPECT_EQ(r.rejection_reasons.size(), 3u);
  EXPECT_EQ(r.find(3)->trials, 2u);
}

TEST(Matching, ScorerOverloadAgreesWithCallback) {
  const Fixture f = make_fixture();
  const auto trials = build_matching_trials(f.data.face, f.data.voice, f.ids, 6, 100, 18).trials;
  const TrialScorer scorer(f.data.face, f.data.voice, f.params);
  const MatchingReport a = match_1_to_n(trials, scorer);
  const MatchingReport b = match_1_to_n(trials, f.data.face, f.data.voice,
                                        [&](const MatchingTrial& t, std::size_t pos) {
                                          const Record& probe = f.data.voice.at(f.data.voice.index_of(t.probe_id));
                                          const Record& g = f.data.face.at(f.data.face.index_of(t.gallery[pos]));
                                          return score_pair(g.vec, probe.vec, f.params).value;
                                        });
  EXPECT_EQ(a.find(6)->correct, b.find(6)->correct);
}

// ---- cross-language ----

TEST(CrossLanguage, IdenticalStoresGiveZeroChange) {
  const Fixture f = make_fixture();
  const auto trials = build_verification_trials(f.data.face, f.data.voice, f.ids, 200, 19).trials;
  const CrossLanguageReport r = cross_language_eval(trials, f.data.face, f.data.voice, f.data.voice, f.params);
  EXPECT_EQ(r.heard.eer, r.unheard.eer);
  EXPECT_EQ(r.pct_change, 0.0);
}

TEST(CrossLanguage, ShiftedLanguageIsNotEasier) {
  // Latent-oracle scoring: recover latents by least squares and compare them,
  // so the check does not depend on training.
  const Fixture f = make_fixture(2.0);
  ASSERT_TRUE(f.data.voice_shifted.has_value());
  const Matrix zf = recover_latents(f.data.face.matrix(), f.data.face_map);
  const Matrix zv = recover_latents(f.data.voice.matrix(), f.data.voice_map);
  const Matrix zs = recover_latents(f.data.voice_shifted->matrix(), f.data.voice_map);
  const auto trials = build_verification_trials(f.data.face, f.data.voice, f.ids, 2000, 20).trials;
  std::vector<double> heard, unheard;
  std::vector<int> y;
  for (const auto& t : trials) {
    const std::size_t a = f.data.face.index_of(t.face_id), b = f.data.voice.index_of(t.voice_id);
    heard.push_back(testing::cos_oracle(zf.row(a), zv.row(b)));
    unheard.push_back(testing::cos_oracle(zf.row(a), zs.row(b)));
    y.push_back(t.genuine ? 1 : 0);
  }
  EXPECT_GE(compute_eer(unheard, y), compute_eer(heard, y));
}

TEST(CrossLanguage, ZeroHeardErrorHandled) {
  // A perfect heard model makes the relative change unbounded unless the
  // unheard error is also zero.
  std::vector<Attributes> a(2);
  EmbeddingStore face(Modality::kFace, 2), voice(Modality::kVoice, 2), flipped(Modality::kVoice, 2);
  face.add({"a", 0, a[0], {1, 0}});
  face.add({"b", 1, a[1], {0, 1}});
  voice.add({"a", 0, a[0], {1, 0}});
  voice.add({"b", 1, a[1], {0, 1}});
  flipped.add({"a", 0, a[0], {0, 1}});
  flipped.add({"b", 1, a[1], {1, 0}});
  FopConfig c;
  c.face_dim = c.voice_dim = c.embed_dim = 2;
  c.num_identities = 2;
  FopParams p = FopParams::zeros(c);
  p.face_w.value = p.voice_w.value = Matrix::identity(2);
  const std::vector<VerificationTrial> trials{{"a", "a", true}, {"a", "b", false}, {"b", "b", true}, {"b", "a", false}};
  const CrossLanguageReport same = cross_language_eval(trials, face, voice, voice, p);
  EXPECT_EQ(same.heard.eer, 0.0);
  EXPECT_EQ(same.pct_change, 0.0);
  const CrossLanguageReport worse = cross_language_eval(trials, face, voice, flipped, p);
  EXPECT_EQ(worse.unheard.eer, 1.0);
  EXPECT_TRUE(std::isinf(worse.pct_change));
}

TEST(ClassStats, MeansAndTraces) {
  const Matrix e{{1, 0}, {3, 0}, {0, 2}};
  const std::vector<std::int32_t> labels{0, 0, 1};
  const auto stats = class_stats(e, labels, "heard");
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].count, 2u);
  EXPECT_EQ(stats[0].mean, (std::vector<double>{2, 0}));
  EXPECT_NEAR(stats[0].cov_trace, 2.0, 1e-15);  // sample variance of {1,3}
  EXPECT_EQ(stats[1].cov_trace, 0.0);
  const std::string csv = encode_class_stats_csv(stats);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,store,count,cov_trace,mean_0,mean_1");
}

TEST(EvalReport, CsvAndTable) {
  const Fixture f = make_fixture();
  const TrialScorer scorer(f.data.face, f.data.voice, f.params);
  const auto trials = build_verification_trials(f.data.face, f.data.voice, f.ids, 100, 21).trials;
  EvalReport r;
  r.overall = evaluate_verification(trials, scorer);
  const auto keys = all_stratum_keys();
  r.strata = evaluate_strata(trials, scorer, keys);
  const auto mt = build_matching_trials(f.data.face, f.data.voice, f.ids, 2, 50, 22).trials;
  r.matching.emplace_back(Modality::kVoice, match_1_to_n(mt, scorer));
  const std::string csv = encode_eval_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "section,key,metric,value");
  EXPECT_NE(csv.find("verification,overall,auc,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("match_voice,2,accuracy,"), std::string::npos) << csv;
  EXPECT_FALSE(format_eval_table(r).empty());
}

}  // namespace
}  // namespace fopkit
