#include "fopkit/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <thread>

#include "fopkit/errors.h"
#include "fopkit/ops.h"
#include "fopkit/text.h"

namespace fopkit {
namespace {

// Applies `embed` to row blocks of `x` on up to `threads` workers. Each output
// row is written by exactly one worker.
template <typename Fn>
Matrix embed_parallel(const Matrix& x, const FopParams& params, std::size_t threads, Fn embed) {
  const std::size_t n = x.rows();
  const std::size_t d = params.face_w.value.cols();
  Matrix out(n, d);
  if (n == 0) return out;
  threads = std::clamp<std::size_t>(threads, 1, n);
  auto work = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> rows(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) rows[i - lo] = i;
    const Matrix block = embed(gather_rows(x, rows), params);
    std::copy(block.data().begin(), block.data().end(), out.data().begin() + lo * d);
  };
  if (threads == 1) {
    work(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t lo = 0; lo < n; lo += chunk) pool.emplace_back(work, lo, std::min(n, lo + chunk));
  for (auto& t : pool) t.join();
  return out;
}

bool attribute_match(const Attributes& a, const Attributes& b, StratumKey key, bool& missing) {
  auto same = [&](std::int32_t x, std::int32_t y) {
    if (x == kUnknownAttribute || y == kUnknownAttribute) {
      missing = true;
      return false;
    }
    return x == y;
  };
  switch (key) {
    case StratumKey::kGender: return same(a.gender, b.gender);
    case StratumKey::kNationality: return same(a.nationality, b.nationality);
    case StratumKey::kAge: return same(a.age_group, b.age_group);
    case StratumKey::kGNA: {
      const bool g = same(a.gender, b.gender);
      const bool n = same(a.nationality, b.nationality);
      const bool ag = same(a.age_group, b.age_group);
      return g && n && ag;
    }
  }
  return false;
}

VerificationReport report_from(const VerificationScores& s) {
  VerificationReport r;
  r.trials = s.scores.size();
  for (int y : s.labels) (y == 1 ? r.genuine : r.impostor)++;
  r.degenerate = s.degenerate;
  r.auc = compute_auc(s.scores, s.labels);
  r.eer = compute_eer(s.scores, s.labels);
  r.roc = compute_roc(s.scores, s.labels);
  return r;
}

}  // namespace

std::string to_string(ScorerKind kind) {
  return kind == ScorerKind::kCosine ? "cosine" : "neg_euclidean";
}

ScorerKind parse_scorer_kind(const std::string& text) {
  if (text == "cosine") return ScorerKind::kCosine;
  if (text == "neg_euclidean") return ScorerKind::kNegEuclidean;
  throw ConfigError("unknown scorer '" + text + "' (expected cosine or neg_euclidean)");
}

Score score_embeddings(std::span<const double> u, std::span<const double> v, ScorerKind kind) {
  if (u.size() != v.size()) {
    throw DimensionError("embedding sizes differ: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
  if (kind == ScorerKind::kCosine) {
    const auto c = ops::cosine_sim(u, v);
    return {c.value, c.degenerate};
  }
  const bool degenerate = ops::norm(u) == 0.0 || ops::norm(v) == 0.0;
  if (degenerate) return {0.0, true};
  return {-std::sqrt(ops::squared_distance(u, v)), false};
}

Score score_pair(std::span<const double> face, std::span<const double> voice,
                 const FopParams& params, ScorerKind kind) {
  const Matrix f(1, face.size(), std::vector<double>(face.begin(), face.end()));
  const Matrix v(1, voice.size(), std::vector<double>(voice.begin(), voice.end()));
  const Matrix u = embed_faces(f, params);
  const Matrix w = embed_voices(v, params);
  return score_embeddings(u.row(0), w.row(0), kind);
}

std::size_t eval_threads() {
  if (const char* env = std::getenv("FOPKIT_THREADS")) {
    try {
      const auto n = text::parse_uint(env, "FOPKIT_THREADS");
      if (n >= 1) return n;
    } catch (const DataError&) {
    }
    throw ConfigError(std::string("FOPKIT_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrialScorer::TrialScorer(const EmbeddingStore& face, const EmbeddingStore& voice,
                         const FopParams& params, ScorerKind kind, std::size_t threads)
    : face_(&face), voice_(&voice), kind_(kind) {
  if (face.dim() != params.face_w.value.rows()) {
    throw DimensionError("face store dim " + std::to_string(face.dim()) + " does not match model " +
                         std::to_string(params.face_w.value.rows()));
  }
  if (voice.dim() != params.voice_w.value.rows()) {
    throw DimensionError("voice store dim " + std::to_string(voice.dim()) +
                         " does not match model " + std::to_string(params.voice_w.value.rows()));
  }
  u_ = embed_parallel(face.matrix(), params, threads, embed_faces);
  v_ = embed_parallel(voice.matrix(), params, threads, embed_voices);
}

Score TrialScorer::score(std::string_view face_id, std::string_view voice_id) const {
  return score_embeddings(u_.row(face_->index_of(face_id)), v_.row(voice_->index_of(voice_id)), kind_);
}

VerificationScores score_verification(std::span<const VerificationTrial> trials,
                                      const TrialScorer& scorer) {
  VerificationScores out;
  out.scores.reserve(trials.size());
  out.labels.reserve(trials.size());
  for (const auto& t : trials) {
    const Score s = scorer.score(t.face_id, t.voice_id);
    out.scores.push_back(s.value);
    out.labels.push_back(t.genuine ? 1 : 0);
    if (s.degenerate) ++out.degenerate;
  }
  return out;
}

VerificationReport evaluate_verification(std::span<const VerificationTrial> trials,
                                         const TrialScorer& scorer) {
  return report_from(score_verification(trials, scorer));
}

std::string to_string(StratumKey key) {
  switch (key) {
    case StratumKey::kGender: return "G";
    case StratumKey::kNationality: return "N";
    case StratumKey::kAge: return "A";
    case StratumKey::kGNA: return "GNA";
  }
  return "?";
}

StratumKey parse_stratum_key(const std::string& text) {
  for (StratumKey k : all_stratum_keys())
    if (to_string(k) == text) return k;
  throw ConfigError("unknown stratum key '" + text + "' (expected G, N, A or GNA)");
}

const std::vector<StratumKey>& all_stratum_keys() {
  static const std::vector<StratumKey> keys = {StratumKey::kGender, StratumKey::kNationality,
                                               StratumKey::kAge, StratumKey::kGNA};
  return keys;
}

StratumSubset stratify(std::span<const VerificationTrial> trials, const EmbeddingStore& face,
                       const EmbeddingStore& voice, StratumKey key) {
  StratumSubset out{key, {}, 0};
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& a = face.at(face.index_of(trials[i].face_id)).attrs;
    const auto& b = voice.at(voice.index_of(trials[i].voice_id)).attrs;
    bool missing = false;
    const bool keep = attribute_match(a, b, key, missing);
    if (missing) {
      ++out.missing_annotations;
    } else if (keep) {
      out.indices.push_back(i);
    }
  }
  return out;
}

std::vector<StratumReport> evaluate_strata(std::span<const VerificationTrial> trials,
                                           const TrialScorer& scorer,
                                           std::span<const StratumKey> keys) {
  std::vector<StratumReport> out;
  for (StratumKey key : keys) {
    const auto subset = stratify(trials, scorer.face_store(), scorer.voice_store(), key);
    StratumReport r;
    r.key = key;
    r.trials = subset.indices.size();
    r.missing_annotations = subset.missing_annotations;
    if (subset.empty()) {
      r.note = "empty subset";
    } else {
      std::vector<VerificationTrial> picked;
      for (std::size_t i : subset.indices) picked.push_back(trials[i]);
      try {
        r.report = evaluate_verification(picked, scorer);
      } catch (const NumericError& e) {
        r.note = e.what();
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

const MatchingAccuracy* MatchingReport::find(std::size_t n_c) const {
  for (const auto& a : by_gallery_size)
    if (a.n_c == n_c) return &a;
  return nullptr;
}

MatchingReport match_1_to_n(std::span<const MatchingTrial> trials, const EmbeddingStore& face,
                            const EmbeddingStore& voice, const GalleryScoreFn& score) {
  MatchingReport report;
  std::vector<MatchingAccuracy> acc;
  auto slot = [&](std::size_t n_c) -> MatchingAccuracy& {
    auto it = std::lower_bound(acc.begin(), acc.end(), n_c,
                               [](const MatchingAccuracy& a, std::size_t n) { return a.n_c < n; });
    if (it == acc.end() || it->n_c != n_c) it = acc.insert(it, MatchingAccuracy{n_c});
    return *it;
  };
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    const bool voice_probe = t.probe_modality == Modality::kVoice;
    const EmbeddingStore& probe_store = voice_probe ? voice : face;
    const EmbeddingStore& gallery_store = voice_probe ? face : voice;
    std::string reason;
    const auto probe_row = probe_store.find(t.probe_id);
    if (!probe_row) reason = "unknown probe id '" + t.probe_id + "'";
    if (reason.empty() && t.gallery.size() < 2) reason = "gallery has fewer than 2 entries";
    if (reason.empty() && t.true_pos >= t.gallery.size()) reason = "true_pos outside the gallery";
    if (reason.empty()) {
      const std::int32_t y = probe_store.at(*probe_row).label;
      std::set<std::int32_t> seen;
      std::size_t matches = 0, match_pos = 0;
      for (std::size_t k = 0; k < t.gallery.size() && reason.empty(); ++k) {
        const auto row = gallery_store.find(t.gallery[k]);
        if (!row) {
          reason = "unknown gallery id '" + t.gallery[k] + "'";
          break;
        }
        const std::int32_t g = gallery_store.at(*row).label;
        if (!seen.insert(g).second) reason = "gallery repeats an identity";
        if (g == y) {
          ++matches;
          match_pos = k;
        }
      }
      if (reason.empty() && matches == 0) reason = "no true match in gallery";
      if (reason.empty() && match_pos != t.true_pos) reason = "true_pos does not point at the match";
    }
    if (!reason.empty()) {
      report.rejected.push_back(i);
      report.rejection_reasons.push_back(reason);
      continue;
    }
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    bool tie = false;
    for (std::size_t k = 0; k < t.gallery.size(); ++k) {
      const double s = score(t, k);
      if (k == 0 || s > best_score) {
        best = k;
        best_score = s;
        tie = false;
      } else if (s == best_score) {
        tie = true;
      }
    }
    MatchingAccuracy& a = slot(t.gallery.size());
    ++a.trials;
    if (best == t.true_pos) ++a.correct;
    if (tie) ++a.ties;
  }
  for (auto& a : acc) a.accuracy = static_cast<double>(a.correct) / static_cast<double>(a.trials);
  report.by_gallery_size = std::move(acc);
  return report;
}

MatchingReport match_1_to_n(std::span<const MatchingTrial> trials, const TrialScorer& scorer) {
  return match_1_to_n(trials, scorer.face_store(), scorer.voice_store(),
                      [&](const MatchingTrial& t, std::size_t pos) {
                        return t.probe_modality == Modality::kVoice
                                   ? scorer.score(t.gallery[pos], t.probe_id).value
                                   : scorer.score(t.probe_id, t.gallery[pos]).value;
                      });
}

CrossLanguageReport cross_language_eval(std::span<const VerificationTrial> trials,
                                        const EmbeddingStore& face,
                                        const EmbeddingStore& voice_heard,
                                        const EmbeddingStore& voice_unheard,
                                        const FopParams& params, ScorerKind kind,
                                        std::size_t threads) {
  if (trials.empty()) throw DataError("cross-language evaluation needs at least one trial");
  if (voice_heard.size() == 0 || voice_unheard.size() == 0) {
    throw DataError("cross-language evaluation needs non-empty voice stores");
  }
  check_paired(face, voice_heard);
  check_paired(face, voice_unheard);
  CrossLanguageReport r;
  r.heard = evaluate_verification(trials, TrialScorer(face, voice_heard, params, kind, threads));
  r.unheard = evaluate_verification(trials, TrialScorer(face, voice_unheard, params, kind, threads));
  if (r.heard.eer == 0.0) {
    r.pct_change = r.unheard.eer == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.pct_change = 100.0 * (r.unheard.eer - r.heard.eer) / r.heard.eer;
  }
  return r;
}

std::vector<ClassStats> class_stats(const Matrix& embeddings, std::span<const std::int32_t> labels,
                                    const std::string& tag) {
  if (labels.size() != embeddings.rows()) {
    throw DimensionError(std::to_string(labels.size()) + " labels for " +
                         std::to_string(embeddings.rows()) + " embeddings");
  }
  std::vector<std::int32_t> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const std::size_t d = embeddings.cols();
  std::vector<ClassStats> out;
  for (std::int32_t c : classes) {
    ClassStats s;
    s.label = c;
    s.tag = tag;
    s.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != c) continue;
      ++s.count;
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += embeddings(i, j);
    }
    for (double& m : s.mean) m /= static_cast<double>(s.count);
    if (s.count > 1) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != c) continue;
        for (std::size_t j = 0; j < d; ++j) {
          const double e = embeddings(i, j) - s.mean[j];
          s.cov_trace += e * e;
        }
      }
      s.cov_trace /= static_cast<double>(s.count - 1);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string encode_class_stats_csv(std::span<const ClassStats> stats) {
  const std::size_t d = stats.empty() ? 0 : stats.front().mean.size();
  std::string out = "class,store,count,cov_trace";
  for (std::size_t j = 0; j < d; ++j) out += ",mean_" + std::to_string(j);
  out += "\n";
  for (const auto& s : stats) {
    out += std::to_string(s.label) + "," + s.tag + "," + std::to_string(s.count) + "," +
           text::format_double(s.cov_trace);
    for (double m : s.mean) out += "," + text::format_double(m);
    out += "\n";
  }
  return out;
}

std::string encode_eval_csv(const EvalReport& report) {
  std::string out = "section,key,metric,value\n";
  auto row = [&](const std::string& section, const std::string& key, const std::string& metric,
                 const std::string& value) { out += section + "," + key + "," + metric + "," + value + "\n"; };
  auto num = [](double x) { return text::format_double(x); };
  if (report.overall) {
    const auto& o = *report.overall;
    row("verification", "overall", "trials", std::to_string(o.trials));
    row("verification", "overall", "auc", num(o.auc));
    row("verification", "overall", "eer", num(o.eer));
    row("verification", "overall", "degenerate", std::to_string(o.degenerate));
  }
  for (const auto& s : report.strata) {
    const std::string key = to_string(s.key);
    row("stratum", key, "trials", std::to_string(s.trials));
    row("stratum", key, "missing_annotations", std::to_string(s.missing_annotations));
    row("stratum", key, "auc", s.report ? num(s.report->auc) : "nan");
    row("stratum", key, "eer", s.report ? num(s.report->eer) : "nan");
  }
  for (const auto& [probe, m] : report.matching) {
    const std::string section = "match_" + to_string(probe);
    for (const auto& a : m.by_gallery_size) {
      const std::string key = std::to_string(a.n_c);
      row(section, key, "trials", std::to_string(a.trials));
      row(section, key, "accuracy", num(a.accuracy));
      row(section, key, "ties", std::to_string(a.ties));
    }
    row(section, "all", "rejected", std::to_string(m.rejected.size()));
  }
  return out;
}

std::string format_eval_table(const EvalReport& report) {
  auto pct = [](double x) { return text::format_fixed(100.0 * x, 2); };
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  auto label = [](std::string s) {
    s.resize(std::max<std::size_t>(s.size(), 9), ' ');
    return "  " + s;
  };
  std::string out;
  if (report.overall || !report.strata.empty()) {
    out += "verification      trials     AUC%     EER%\n";
  }
  if (report.overall) {
    out += label("overall") + pad(std::to_string(report.overall->trials), 7) +
           pad(pct(report.overall->auc), 9) + pad(pct(report.overall->eer), 9) + "\n";
  }
  for (const auto& s : report.strata) {
    out += label(to_string(s.key)) + pad(std::to_string(s.trials), 7);
    if (s.report) {
      out += pad(pct(s.report->auc), 9) + pad(pct(s.report->eer), 9);
    } else {
      out += "        -        -  (" + s.note + ")";
    }
    if (s.missing_annotations > 0) out += "  [" + std::to_string(s.missing_annotations) + " unannotated]";
    out += "\n";
  }
  for (const auto& [probe, m] : report.matching) {
    out += "matching, " + to_string(probe) + " probe\n";
    out += "  n_c         trials     acc%     ties\n";
    for (const auto& a : m.by_gallery_size) {
      out += label(std::to_string(a.n_c)) + pad(std::to_string(a.trials), 7) + pad(pct(a.accuracy), 9) +
             pad(std::to_string(a.ties), 9) + "\n";
    }
    if (!m.rejected.empty()) out += "  rejected trials: " + std::to_string(m.rejected.size()) + "\n";
  }
  return out;
}

}  // namespace fopkit
