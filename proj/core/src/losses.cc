#include "fopkit/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fopkit/errors.h"
#include "fopkit/ops.h"

namespace fopkit {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kFopJoint: return "fop_joint";
    case LossKind::kCeOnly: return "ce_only";
    case LossKind::kCenter: return "center";
    case LossKind::kGit: return "git";
    case LossKind::kContrastive: return "contrastive";
    case LossKind::kTriplet: return "triplet";
  }
  return "unknown";
}

const std::vector<LossKind>& all_loss_kinds() {
  static const std::vector<LossKind> kinds = {LossKind::kCeOnly,      LossKind::kFopJoint,
                                              LossKind::kCenter,      LossKind::kGit,
                                              LossKind::kContrastive, LossKind::kTriplet};
  return kinds;
}

LossKind parse_loss_kind(const std::string& text) {
  for (LossKind k : all_loss_kinds())
    if (to_string(k) == text) return k;
  throw ConfigError("unknown loss kind '" + text +
                    "' (expected fop_joint, ce_only, center, git, contrastive or triplet)");
}

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be finite and >= 0, got " + std::to_string(alpha));
  }
  if (!(alpha_c >= 0.0) || !(alpha_g >= 0.0)) {
    throw ConfigError("alpha_c and alpha_g must be >= 0");
  }
  if ((kind == LossKind::kContrastive || kind == LossKind::kTriplet) && !(margin > 0.0)) {
    throw ConfigError("margin must be > 0, got " + std::to_string(margin));
  }
  if ((kind == LossKind::kCenter || kind == LossKind::kGit) &&
      !(center_rate > 0.0 && center_rate <= 1.0)) {
    throw ConfigError("center_rate must lie in (0, 1], got " + std::to_string(center_rate));
  }
}

namespace {

void check_labels(std::span<const int> labels, std::size_t rows, const char* op) {
  if (labels.size() != rows) {
    throw DimensionError(std::string(op) + ": " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(rows) + " rows");
  }
}

void check_bank(const CenterBank& bank, const Matrix& fused, std::span<const int> labels,
                const char* op) {
  check_labels(labels, fused.rows(), op);
  if (bank.centers.cols() != fused.cols()) {
    throw DimensionError(std::string(op) + ": centers " + bank.centers.shape_string() +
                         " do not match features " + fused.shape_string());
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= bank.centers.rows()) {
      throw DataError(std::string(op) + ": label " + std::to_string(y) + " outside center bank");
    }
  }
}

}  // namespace

LossOutput ce_loss(const Matrix& logits, std::span<const int> labels) {
  auto ce = ops::softmax_cross_entropy(logits, labels);
  LossOutput out;
  out.value = ce.value;
  out.work = logits.rows();
  out.grads.logits = std::move(ce.grad_logits);
  return out;
}

OcTerms oc_terms(const Matrix& fused, std::span<const int> labels) {
  check_labels(labels, fused.rows(), "oc_terms");
  OcTerms t;
  double same = 0.0, diff = 0.0, diff_abs = 0.0, all_abs = 0.0;
  for (std::size_t i = 0; i < fused.rows(); ++i) {
    for (std::size_t j = i + 1; j < fused.rows(); ++j) {
      const double c = ops::cosine_sim(fused.row(i), fused.row(j)).value;
      all_abs += std::abs(c);
      if (labels[i] == labels[j]) {
        same += c;
        ++t.same_pairs;
      } else {
        diff += c;
        diff_abs += std::abs(c);
        ++t.diff_pairs;
      }
    }
  }
  if (t.same_pairs > 0) t.same_mean = same / t.same_pairs;
  if (t.diff_pairs > 0) {
    t.diff_mean = diff / t.diff_pairs;
    t.diff_abs_mean = diff_abs / t.diff_pairs;
  }
  const std::uint64_t pairs = t.same_pairs + t.diff_pairs;
  if (pairs > 0) t.all_abs_mean = all_abs / pairs;
  return t;
}

LossOutput oc_loss(const Matrix& fused, std::span<const int> labels) {
  check_labels(labels, fused.rows(), "oc_loss");
  const std::size_t batch = fused.rows();
  if (batch < 2) {
    throw DimensionError("oc_loss: batch too small (" + std::to_string(batch) +
                         " rows, need >= 2)");
  }
  const OcTerms t = oc_terms(fused, labels);
  LossOutput out;
  out.value = 1.0 - t.same_mean + std::abs(t.diff_mean);
  out.work = t.same_pairs + t.diff_pairs;

  const double g_same = t.same_pairs > 0 ? -1.0 / t.same_pairs : 0.0;
  const double sign = t.diff_mean > 0.0 ? 1.0 : (t.diff_mean < 0.0 ? -1.0 : 0.0);
  const double g_diff = t.diff_pairs > 0 ? sign / t.diff_pairs : 0.0;
  Matrix grad(batch, fused.cols());
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = i + 1; j < batch; ++j) {
      const double g = labels[i] == labels[j] ? g_same : g_diff;
      if (g == 0.0) continue;
      ops::cosine_backward(fused.row(i), fused.row(j), g, grad.row(i), grad.row(j));
    }
  }
  out.grads.fused = std::move(grad);
  return out;
}

LossOutput fop_joint(const ForwardCache& cache, std::span<const int> labels, double alpha) {
  LossOutput out = ce_loss(cache.logits, labels);
  if (alpha == 0.0) return out;
  LossOutput oc = oc_loss(cache.fused, labels);
  out.value += alpha * oc.value;
  out.work += oc.work;
  out.grads.fused = ops::scale(oc.grads.fused, alpha);
  return out;
}

CenterBank::CenterBank(std::size_t num_identities, std::size_t dim)
    : centers(num_identities, dim), touched(num_identities, 0) {}

LossOutput center_loss(const Matrix& fused, std::span<const int> labels, const CenterBank& bank) {
  check_bank(bank, fused, labels, "center_loss");
  LossOutput out;
  Matrix grad(fused.rows(), fused.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < fused.rows(); ++i) {
    const auto l = fused.row(i);
    const auto c = bank.centers.row(static_cast<std::size_t>(labels[i]));
    auto g = grad.row(i);
    for (std::size_t k = 0; k < l.size(); ++k) {
      const double r = l[k] - c[k];
      total += r * r;
      g[k] = r;
    }
  }
  out.value = 0.5 * total;
  out.work = fused.rows();
  out.grads.fused = std::move(grad);
  return out;
}

void update_centers(CenterBank& bank, const Matrix& fused, std::span<const int> labels,
                    double rate) {
  check_bank(bank, fused, labels, "update_centers");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  for (const auto& [y, rows] : members) {
    auto c = bank.centers.row(static_cast<std::size_t>(y));
    std::vector<double> delta(c.size(), 0.0);
    for (std::size_t i : rows) {
      const auto l = fused.row(i);
      for (std::size_t k = 0; k < c.size(); ++k) delta[k] += c[k] - l[k];
    }
    for (std::size_t k = 0; k < c.size(); ++k) c[k] -= rate * delta[k] / rows.size();
    ++bank.touched[static_cast<std::size_t>(y)];
  }
}

LossOutput git_loss(const Matrix& fused, std::span<const int> labels, const CenterBank& bank) {
  check_bank(bank, fused, labels, "git_loss");
  const std::size_t batch = fused.rows();
  LossOutput out;
  Matrix grad(batch, fused.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const auto l = fused.row(i);
    auto g = grad.row(i);
    for (std::size_t j = 0; j < batch; ++j) {
      if (i == j) continue;
      const auto c = bank.centers.row(static_cast<std::size_t>(labels[j]));
      const double q = ops::squared_distance(l, c);
      const double denom = 1.0 + q;
      total += 1.0 / denom;
      const double coeff = -2.0 / (denom * denom);
      for (std::size_t k = 0; k < l.size(); ++k) g[k] += coeff * (l[k] - c[k]);
    }
  }
  out.value = total;
  out.work = batch * (batch - (batch > 0 ? 1 : 0));
  out.grads.fused = std::move(grad);
  return out;
}

LossOutput contrastive_loss(const Matrix& u, const Matrix& v, std::span<const int> pair_labels,
                            double margin) {
  if (!(margin > 0.0)) throw ConfigError("contrastive margin must be > 0");
  if (!u.same_shape(v)) {
    throw DimensionError("contrastive_loss: u " + u.shape_string() + " vs v " + v.shape_string());
  }
  check_labels(pair_labels, u.rows(), "contrastive_loss");
  const std::size_t pairs = u.rows();
  LossOutput out;
  out.work = pairs;
  out.grads.u = Matrix(pairs, u.cols());
  out.grads.v = Matrix(pairs, u.cols());
  if (pairs == 0) return out;
  double total = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto a = u.row(i);
    const auto b = v.row(i);
    const double d2 = ops::squared_distance(a, b);
    auto ga = out.grads.u.row(i);
    auto gb = out.grads.v.row(i);
    if (pair_labels[i] == 1) {
      total += d2;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double g = 2.0 * (a[k] - b[k]) / pairs;
        ga[k] = g;
        gb[k] = -g;
      }
    } else if (pair_labels[i] == 0) {
      const double d = std::sqrt(d2);
      const double gap = margin - d;
      if (gap <= 0.0) continue;
      total += gap * gap;
      if (d == 0.0) continue;  // direction undefined; subgradient 0
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double g = -2.0 * gap * (a[k] - b[k]) / d / pairs;
        ga[k] = g;
        gb[k] = -g;
      }
    } else {
      throw DataError("contrastive pair label must be 0 or 1, got " +
                      std::to_string(pair_labels[i]));
    }
  }
  out.value = total / pairs;
  return out;
}

ContrastivePairs build_contrastive_pairs(std::span<const int> labels, Rng& rng) {
  const std::size_t n = labels.size();
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  ContrastivePairs out;
  out.negative_of.assign(n, npos);
  std::vector<std::uint64_t> seen(n, 0);
  // Reservoir sampling over each instance's different-identity candidates.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++out.examined;
      if (labels[i] == labels[j]) continue;
      if (uniform_index(rng, ++seen[i]) == 0) out.negative_of[i] = j;
      if (uniform_index(rng, ++seen[j]) == 0) out.negative_of[j] = i;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.face.push_back(i);
    out.voice.push_back(i);
    out.label.push_back(1);
    if (out.negative_of[i] != npos) {
      out.face.push_back(i);
      out.voice.push_back(out.negative_of[i]);
      out.label.push_back(0);
    }
  }
  return out;
}

TripletMining mine_hard_negatives(const Matrix& u, const Matrix& v, std::span<const int> labels) {
  if (!u.same_shape(v)) {
    throw DimensionError("mine_hard_negatives: u " + u.shape_string() + " vs v " +
                         v.shape_string());
  }
  check_labels(labels, u.rows(), "mine_hard_negatives");
  const std::size_t batch = u.rows();
  TripletMining out;
  // dist(a, f) = |v_a - u_f|^2
  Matrix dist(batch, batch);
  for (std::size_t a = 0; a < batch; ++a)
    for (std::size_t f = 0; f < batch; ++f) dist(a, f) = ops::squared_distance(v.row(a), u.row(f));

  for (std::size_t a = 0; a < batch; ++a) {
    for (std::size_t p = 0; p < batch; ++p) {
      if (labels[p] != labels[a]) continue;
      std::size_t best = batch;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < batch; ++n) {
        if (labels[n] == labels[a]) continue;
        ++out.candidates;
        if (dist(a, n) < best_d) {
          best_d = dist(a, n);
          best = n;
        }
      }
      if (best < batch) out.triplets.push_back({a, p, best});
    }
  }
  out.no_triplets = out.triplets.empty();
  return out;
}

LossOutput triplet_loss(const Matrix& u, const Matrix& v, std::span<const Triplet> triplets,
                        double margin) {
  if (!(margin > 0.0)) throw ConfigError("triplet margin must be > 0");
  LossOutput out;
  out.grads.u = Matrix(u.rows(), u.cols());
  out.grads.v = Matrix(v.rows(), v.cols());
  out.work = triplets.size();
  if (triplets.empty()) {
    out.degenerate = true;
    return out;
  }
  const double inv = 1.0 / static_cast<double>(triplets.size());
  double total = 0.0;
  for (const Triplet& t : triplets) {
    const auto va = v.row(t.anchor);
    const auto up = u.row(t.positive);
    const auto un = u.row(t.negative);
    const double h = ops::squared_distance(va, up) - ops::squared_distance(va, un) + margin;
    if (h <= 0.0) continue;
    total += h;
    auto ga = out.grads.v.row(t.anchor);
    auto gp = out.grads.u.row(t.positive);
    auto gn = out.grads.u.row(t.negative);
    for (std::size_t k = 0; k < va.size(); ++k) {
      ga[k] += 2.0 * (un[k] - up[k]) * inv;
      gp[k] += -2.0 * (va[k] - up[k]) * inv;
      gn[k] += 2.0 * (va[k] - un[k]) * inv;
    }
  }
  out.value = total * inv;
  return out;
}

std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch, bool merge_singleton) {
  if (batch == 0) throw ConfigError("batch size must be >= 1");
  std::vector<std::size_t> sizes;
  for (std::size_t start = 0; start < n; start += batch) sizes.push_back(std::min(batch, n - start));
  if (merge_singleton && sizes.size() > 1 && sizes.back() < 2) {
    sizes[sizes.size() - 2] += sizes.back();
    sizes.pop_back();
  }
  return sizes;
}

bool requires_pairs(const LossConfig& config) {
  switch (config.kind) {
    case LossKind::kFopJoint: return config.alpha != 0.0;
    case LossKind::kGit:
    case LossKind::kTriplet: return true;
    default: return false;
  }
}

std::uint64_t count_triplet_candidates(std::span<const int> batch_labels) {
  std::map<int, std::uint64_t> per_identity;
  for (int y : batch_labels) ++per_identity[y];
  const std::uint64_t b = batch_labels.size();
  std::uint64_t total = 0;
  // Each of the k anchors of an identity pairs with k positives and b-k negatives.
  for (const auto& [y, k] : per_identity) total += k * k * (b - k);
  return total;
}

std::uint64_t count_work(LossKind kind, std::size_t batch_size, std::size_t n,
                         std::span<const int> labels_in_batch_order) {
  LossConfig cfg;
  cfg.kind = kind;
  const auto sizes = batch_sizes(n, batch_size, requires_pairs(cfg));
  const std::uint64_t nn = n;
  std::uint64_t pairs = 0;
  std::uint64_t ordered = 0;
  for (std::uint64_t b : sizes) {
    pairs += b * (b - 1) / 2;
    ordered += b * (b - 1);
  }
  switch (kind) {
    case LossKind::kCeOnly: return nn;
    case LossKind::kFopJoint: return nn + pairs;
    case LossKind::kCenter: return 2 * nn;
    case LossKind::kGit: return 2 * nn + ordered;
    case LossKind::kContrastive: return nn * (nn - (nn > 0 ? 1 : 0)) / 2;
    case LossKind::kTriplet: {
      if (labels_in_batch_order.size() != n) {
        throw ConfigError("count_work(triplet) needs the epoch's labels in batch order");
      }
      std::uint64_t total = 0;
      std::size_t start = 0;
      for (std::size_t b : sizes) {
        total += count_triplet_candidates(labels_in_batch_order.subspan(start, b));
        start += b;
      }
      return total;
    }
  }
  return 0;
}

}  // namespace fopkit
