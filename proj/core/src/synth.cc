#include "fopkit/synth.h"

#include <cmath>
#include <cstdio>

#include "fopkit/errors.h"
#include "fopkit/ops.h"
#include "fopkit/rng.h"
#include "fopkit/text.h"

namespace fopkit {

void SyntheticSpec::validate() const {
  if (identities < 1 || per_identity < 1 || latent_dim < 1 || face_dim < 1 || voice_dim < 1) {
    throw ConfigError("synthetic dims and counts must be >= 1");
  }
  if (!(noise >= 0.0)) throw ConfigError("synthetic noise must be >= 0");
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    throw ConfigError("synthetic correlation must lie in [0, 1]");
  }
  if (!(language_shift >= 0.0)) throw ConfigError("language shift must be >= 0");
}

std::string SyntheticSpec::canonical() const {
  return "identities=" + std::to_string(identities) + "\nper_identity=" +
         std::to_string(per_identity) + "\nlatent_dim=" + std::to_string(latent_dim) +
         "\nface_dim=" + std::to_string(face_dim) + "\nvoice_dim=" + std::to_string(voice_dim) +
         "\nnoise=" + text::format_double(noise) + "\ncorrelation=" +
         text::format_double(correlation) + "\nlanguage_shift=" +
         text::format_double(language_shift) + "\nseed=" + std::to_string(seed) + "\n";
}

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = scale * standard_normal(rng);
  return m;
}

std::vector<double> project_with_noise(const Matrix& map, const std::vector<double>& latent,
                                       double noise, Rng& rng) {
  std::vector<double> out(map.rows());
  for (std::size_t r = 0; r < map.rows(); ++r) {
    out[r] = ops::dot(map.row(r), latent) + noise * standard_normal(rng);
  }
  return out;
}

std::string instance_id(std::size_t identity, std::size_t instance) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "id%04zu_%04zu", identity, instance);
  return buf;
}

}  // namespace

SyntheticData synthesize(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t L = spec.latent_dim;
  const double map_scale = 1.0 / std::sqrt(static_cast<double>(L));
  SyntheticData data{EmbeddingStore(Modality::kFace, spec.face_dim),
                     EmbeddingStore(Modality::kVoice, spec.voice_dim), std::nullopt,
                     gaussian(spec.face_dim, L, map_scale, rng),
                     gaussian(spec.voice_dim, L, map_scale, rng)};

  // The second language has its own stream, so the first-language stores do
  // not depend on language_shift.
  Rng language_rng(sub_seed(spec.seed, "language"));
  std::vector<double> shift(L, 0.0);
  if (spec.language_shift > 0.0) {
    double n2 = 0.0;
    for (double& s : shift) {
      s = standard_normal(language_rng);
      n2 += s * s;
    }
    for (double& s : shift) s *= spec.language_shift / std::sqrt(n2);
    data.voice_shifted = EmbeddingStore(Modality::kVoice, spec.voice_dim);
  }

  const double rho = spec.correlation;
  const double own = std::sqrt(1.0 - rho * rho);
  for (std::size_t c = 0; c < spec.identities; ++c) {
    std::vector<double> face_latent(L), voice_latent(L);
    for (std::size_t k = 0; k < L; ++k) {
      const double shared = standard_normal(rng);
      const double pf = standard_normal(rng);
      const double pv = standard_normal(rng);
      face_latent[k] = rho * shared + own * pf;
      voice_latent[k] = rho * shared + own * pv;
    }
    std::vector<double> shifted_latent = voice_latent;
    for (std::size_t k = 0; k < L; ++k) shifted_latent[k] += shift[k];

    Attributes attrs;
    attrs.gender = static_cast<std::int32_t>(c % 2);
    attrs.nationality = static_cast<std::int32_t>(c % 3);
    attrs.age_group = static_cast<std::int32_t>(c % 4);
    attrs.language = 0;
    for (std::size_t j = 0; j < spec.per_identity; ++j) {
      const std::string id = instance_id(c, j);
      const auto label = static_cast<std::int32_t>(c);
      data.face.add({id, label, attrs, project_with_noise(data.face_map, face_latent, spec.noise, rng)});
      data.voice.add({id, label, attrs, project_with_noise(data.voice_map, voice_latent, spec.noise, rng)});
      if (data.voice_shifted) {
        Attributes shifted_attrs = attrs;
        shifted_attrs.language = 1;
        data.voice_shifted->add({id, label, shifted_attrs,
                                 project_with_noise(data.voice_map, shifted_latent, spec.noise, language_rng)});
      }
    }
  }
  return data;
}

Matrix recover_latents(const Matrix& features, const Matrix& map) {
  const std::size_t L = map.cols();
  // Normal equations: (A^T A) z = A^T x, solved by Gauss-Jordan on [A^T A | I].
  const Matrix at = ops::transpose(map);
  Matrix gram = ops::matmul(at, map);
  Matrix inv = Matrix::identity(L);
  for (std::size_t col = 0; col < L; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < L; ++r)
      if (std::abs(gram(r, col)) > std::abs(gram(pivot, col))) pivot = r;
    if (std::abs(gram(pivot, col)) < 1e-14) throw NumericError("recover_latents: singular map");
    for (std::size_t k = 0; k < L; ++k) {
      std::swap(gram(col, k), gram(pivot, k));
      std::swap(inv(col, k), inv(pivot, k));
    }
    const double p = gram(col, col);
    for (std::size_t k = 0; k < L; ++k) {
      gram(col, k) /= p;
      inv(col, k) /= p;
    }
    for (std::size_t r = 0; r < L; ++r) {
      if (r == col) continue;
      const double f = gram(r, col);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < L; ++k) {
        gram(r, k) -= f * gram(col, k);
        inv(r, k) -= f * inv(col, k);
      }
    }
  }
  // z^T = x^T A (A^T A)^{-1}
  return ops::matmul(ops::matmul(features, map), inv);
}

}  // namespace fopkit
