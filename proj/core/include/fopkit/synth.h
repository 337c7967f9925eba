#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fopkit/matrix.h"
#include "fopkit/store.h"

namespace fopkit {

/// Paired face/voice feature generator with controllable cross-modal signal.
///
/// Each identity c draws a shared latent z_c and modality-private latents
/// p_c, q_c (all standard normal, latent_dim long). With rho = correlation:
///   face  = A_f (rho z_c + sqrt(1 - rho^2) p_c) + noise * eps
///   voice = A_v (rho z_c + sqrt(1 - rho^2) q_c) + noise * eps
/// A_f, A_v are fixed Gaussian maps scaled by 1/sqrt(latent_dim). rho = 0
/// leaves no cross-modal identity signal. A nonzero language_shift adds a
/// second voice store whose latents are offset by a fixed random vector of
/// that norm before projection, with fresh noise.
struct SyntheticSpec {
  std::size_t identities = 32;
  std::size_t per_identity = 20;
  std::size_t latent_dim = 8;
  std::size_t face_dim = 64;
  std::size_t voice_dim = 48;
  double noise = 0.1;
  double correlation = 0.9;
  double language_shift = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  // Stable key=value rendering; hashed into manifests.
  std::string canonical() const;
};

struct SyntheticData {
  EmbeddingStore face;
  EmbeddingStore voice;                        // language 0
  std::optional<EmbeddingStore> voice_shifted;  // language 1
  Matrix face_map;   // A_f, F x L
  Matrix voice_map;  // A_v, V x L
};

SyntheticData synthesize(const SyntheticSpec& spec);

/// Least-squares latent recovery x -> (A^T A)^{-1} A^T x for each row; the
/// "oracle" scorer compares recovered latents by cosine.
Matrix recover_latents(const Matrix& features, const Matrix& map);

}  // namespace fopkit
