#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fopkit/matrix.h"
#include "fopkit/metrics.h"
#include "fopkit/model.h"
#include "fopkit/store.h"
#include "fopkit/trials.h"

namespace fopkit {

enum class ScorerKind {
  kCosine,        // cos(u, v)
  kNegEuclidean,  // -|u - v|
};

std::string to_string(ScorerKind kind);
ScorerKind parse_scorer_kind(const std::string& text);

struct Score {
  double value = 0.0;
  bool degenerate = false;  // zero embedding; value is the neutral 0
};

/// Score between already-projected embeddings.
Score score_embeddings(std::span<const double> u, std::span<const double> v, ScorerKind kind);

/// Projects one face and one voice vector through the model and scores them.
Score score_pair(std::span<const double> face, std::span<const double> voice,
                 const FopParams& params, ScorerKind kind = ScorerKind::kCosine);

/// Worker count for evaluation: FOPKIT_THREADS if set (>= 1), otherwise the
/// hardware concurrency.
std::size_t eval_threads();

/// Embeds every record of a face store and a voice store once on a frozen
/// parameter snapshot, then scores instances by id. Rows are split across
/// `threads` workers; each row is computed by exactly one worker, so results
/// do not depend on the worker count.
class TrialScorer {
 public:
  TrialScorer(const EmbeddingStore& face, const EmbeddingStore& voice, const FopParams& params,
              ScorerKind kind = ScorerKind::kCosine, std::size_t threads = 1);

  Score score(std::string_view face_id, std::string_view voice_id) const;

  const EmbeddingStore& face_store() const { return *face_; }
  const EmbeddingStore& voice_store() const { return *voice_; }
  const Matrix& face_embeddings() const { return u_; }
  const Matrix& voice_embeddings() const { return v_; }

 private:
  const EmbeddingStore* face_;
  const EmbeddingStore* voice_;
  ScorerKind kind_;
  Matrix u_;
  Matrix v_;
};

struct VerificationReport {
  std::size_t trials = 0;
  std::size_t genuine = 0;
  std::size_t impostor = 0;
  std::size_t degenerate = 0;
  double auc = 0.0;
  double eer = 0.0;
  RocCurve roc;
};

struct VerificationScores {
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t degenerate = 0;
};

VerificationScores score_verification(std::span<const VerificationTrial> trials,
                                      const TrialScorer& scorer);

VerificationReport evaluate_verification(std::span<const VerificationTrial> trials,
                                         const TrialScorer& scorer);

/// Demographic filter keys: gender, nationality, age group, all three.
enum class StratumKey { kGender, kNationality, kAge, kGNA };

std::string to_string(StratumKey key);  // "G", "N", "A", "GNA"
StratumKey parse_stratum_key(const std::string& text);
const std::vector<StratumKey>& all_stratum_keys();

struct StratumSubset {
  StratumKey key;
  std::vector<std::size_t> indices;  // trials whose two members share the attribute(s)
  std::size_t missing_annotations = 0;  // trials excluded for unknown attributes
  bool empty() const { return indices.empty(); }
};

StratumSubset stratify(std::span<const VerificationTrial> trials, const EmbeddingStore& face,
                       const EmbeddingStore& voice, StratumKey key);

struct StratumReport {
  StratumKey key;
  std::size_t trials = 0;
  std::size_t missing_annotations = 0;
  std::optional<VerificationReport> report;  // empty when the metric is undefined
  std::string note;                          // why `report` is empty
};

std::vector<StratumReport> evaluate_strata(std::span<const VerificationTrial> trials,
                                           const TrialScorer& scorer,
                                           std::span<const StratumKey> keys);

struct MatchingAccuracy {
  std::size_t n_c = 0;
  std::size_t trials = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;  // trials whose top score was shared
  double accuracy = 0.0;
};

struct MatchingReport {
  std::vector<MatchingAccuracy> by_gallery_size;  // ascending n_c
  std::vector<std::size_t> rejected;              // indices of malformed trials
  std::vector<std::string> rejection_reasons;

  const MatchingAccuracy* find(std::size_t n_c) const;
};

/// Score of gallery entry `pos` against the trial's probe.
using GalleryScoreFn = std::function<double(const MatchingTrial& trial, std::size_t pos)>;

/// Predicts the highest-scoring gallery entry (lowest position on ties) for
/// every well-formed trial. Galleries whose entries do not contain exactly one
/// probe-identity match, or repeat an identity, are rejected by index.
MatchingReport match_1_to_n(std::span<const MatchingTrial> trials, const EmbeddingStore& face,
                            const EmbeddingStore& voice, const GalleryScoreFn& score);

MatchingReport match_1_to_n(std::span<const MatchingTrial> trials, const TrialScorer& scorer);

/// Heard vs unheard-language verification of the same trials.
struct CrossLanguageReport {
  VerificationReport heard;
  VerificationReport unheard;
  double pct_change = 0.0;  // 100 (EER_unheard - EER_heard) / EER_heard
};

CrossLanguageReport cross_language_eval(std::span<const VerificationTrial> trials,
                                        const EmbeddingStore& face,
                                        const EmbeddingStore& voice_heard,
                                        const EmbeddingStore& voice_unheard,
                                        const FopParams& params,
                                        ScorerKind kind = ScorerKind::kCosine,
                                        std::size_t threads = 1);

/// Per-identity mean and covariance trace of projected embeddings.
struct ClassStats {
  std::int32_t label = 0;
  std::string tag;
  std::size_t count = 0;
  std::vector<double> mean;
  double cov_trace = 0.0;
};

std::vector<ClassStats> class_stats(const Matrix& embeddings, std::span<const std::int32_t> labels,
                                    const std::string& tag);

// class,store,count,cov_trace,mean_0..mean_{d-1}
std::string encode_class_stats_csv(std::span<const ClassStats> stats);

/// Everything `eval` reports for one model on one test split.
struct EvalReport {
  std::optional<VerificationReport> overall;
  std::vector<StratumReport> strata;
  std::vector<std::pair<Modality, MatchingReport>> matching;  // by probe modality
};

// section,key,metric,value rows; undefined metrics are written as "nan".
std::string encode_eval_csv(const EvalReport& report);
std::string format_eval_table(const EvalReport& report);

}  // namespace fopkit
