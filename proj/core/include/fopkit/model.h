#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fopkit/matrix.h"

namespace fopkit {

enum class FusionKind : std::uint8_t { kGated = 0, kLinear = 1 };

std::string to_string(FusionKind kind);
FusionKind parse_fusion_kind(const std::string& text);

struct FopConfig {
  std::size_t face_dim = 0;
  std::size_t voice_dim = 0;
  std::size_t embed_dim = 128;
  std::size_t num_identities = 0;
  FusionKind fusion = FusionKind::kGated;

  void validate() const;
  friend bool operator==(const FopConfig&, const FopConfig&) = default;
};

/// All trainable weights of the fusion network.
struct FopParams {
  Parameter face_w;      // F x d
  Parameter face_b;      // 1 x d
  Parameter voice_w;     // V x d
  Parameter voice_b;     // 1 x d
  Parameter att_w;       // 2d x d
  Parameter att_b;       // 1 x d
  Parameter classifier;  // d x C, no bias

  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static FopParams init(const FopConfig& config, std::uint64_t seed);
  /// All-zero weights of the right shapes.
  static FopParams zeros(const FopConfig& config);

  // Fixed order, used by the optimizer and the checkpoint format.
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  void zero_grad();
  bool shapes_match(const FopConfig& config) const;
};

struct Projection {
  Matrix face_lin;   // affine(face)
  Matrix voice_lin;  // affine(voice)
  Matrix u;          // unit rows
  Matrix v;          // unit rows
};

/// Intermediates of one forward pass, retained for backward.
struct ForwardCache {
  Matrix face;
  Matrix voice;
  Projection proj;
  Matrix uv;      // [u, v]
  Matrix k;       // attention scores (gated only)
  Matrix tanh_u;  // (gated only)
  Matrix tanh_v;  // (gated only)
  Matrix fused;   // l
  Matrix logits;  // l W
};

/// Gradients of a scalar loss wrt forward outputs. Empty matrices mean zero.
struct ForwardGrads {
  Matrix u;
  Matrix v;
  Matrix fused;
  Matrix logits;
};

Projection project(const Matrix& face, const Matrix& voice, const FopParams& params,
                   const FopConfig& config);

Matrix attention_scores(const Matrix& u, const Matrix& v, const FopParams& params);
Matrix gated_fuse(const Matrix& u, const Matrix& v, const Matrix& k);
Matrix linear_fuse(const Matrix& u, const Matrix& v);

ForwardCache forward(const Matrix& face, const Matrix& voice, const FopParams& params,
                     const FopConfig& config);

/// Accumulates parameter gradients for the graph recorded in `cache`.
void backward(const ForwardCache& cache, const ForwardGrads& grads, FopParams& params,
              const FopConfig& config);

/// Projected, L2-normalized face embeddings (u) for a batch of face vectors.
Matrix embed_faces(const Matrix& face, const FopParams& params);
/// Projected, L2-normalized voice embeddings (v) for a batch of voice vectors.
Matrix embed_voices(const Matrix& voice, const FopParams& params);

}  // namespace fopkit
