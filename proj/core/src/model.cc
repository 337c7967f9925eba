#include "fopkit/model.h"

#include <cmath>

#include "fopkit/errors.h"
#include "fopkit/ops.h"
#include "fopkit/rng.h"

namespace fopkit {

std::string to_string(FusionKind kind) {
  return kind == FusionKind::kGated ? "gated" : "linear";
}

FusionKind parse_fusion_kind(const std::string& text) {
  if (text == "gated") return FusionKind::kGated;
  if (text == "linear") return FusionKind::kLinear;
  throw ConfigError("unknown fusion kind '" + text + "' (expected gated or linear)");
}

void FopConfig::validate() const {
  if (face_dim < 1 || voice_dim < 1 || embed_dim < 1 || num_identities < 1) {
    throw ConfigError("model dims must be >= 1 (face=" + std::to_string(face_dim) +
                      " voice=" + std::to_string(voice_dim) + " embed=" +
                      std::to_string(embed_dim) + " identities=" +
                      std::to_string(num_identities) + ")");
  }
}

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (double& x : m.data()) x = uniform(rng, -bound, bound);
  return m;
}

}  // namespace

FopParams FopParams::zeros(const FopConfig& config) {
  config.validate();
  const std::size_t d = config.embed_dim;
  FopParams p;
  p.face_w = Parameter("face_w", Matrix(config.face_dim, d));
  p.face_b = Parameter("face_b", Matrix(1, d));
  p.voice_w = Parameter("voice_w", Matrix(config.voice_dim, d));
  p.voice_b = Parameter("voice_b", Matrix(1, d));
  p.att_w = Parameter("att_w", Matrix(2 * d, d));
  p.att_b = Parameter("att_b", Matrix(1, d));
  p.classifier = Parameter("classifier", Matrix(d, config.num_identities));
  return p;
}

FopParams FopParams::init(const FopConfig& config, std::uint64_t seed) {
  FopParams p = zeros(config);
  Rng rng(seed);
  for (Parameter* w : {&p.face_w, &p.voice_w, &p.att_w, &p.classifier}) {
    w->value = uniform_matrix(w->value.rows(), w->value.cols(), rng);
  }
  return p;
}

std::vector<Parameter*> FopParams::all() {
  return {&face_w, &face_b, &voice_w, &voice_b, &att_w, &att_b, &classifier};
}

std::vector<const Parameter*> FopParams::all() const {
  return {&face_w, &face_b, &voice_w, &voice_b, &att_w, &att_b, &classifier};
}

void FopParams::zero_grad() {
  for (Parameter* p : all()) p->zero_grad();
}

bool FopParams::shapes_match(const FopConfig& config) const {
  const FopParams ref = zeros(config);
  const auto mine = all();
  const auto theirs = ref.all();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (!mine[i]->value.same_shape(theirs[i]->value) ||
        !mine[i]->grad.same_shape(theirs[i]->value)) {
      return false;
    }
  }
  return true;
}

Projection project(const Matrix& face, const Matrix& voice, const FopParams& params,
                   const FopConfig& config) {
  if (face.cols() != config.face_dim || voice.cols() != config.voice_dim) {
    throw DimensionError("project: inputs face " + face.shape_string() + " / voice " +
                         voice.shape_string() + " do not match configured dims " +
                         std::to_string(config.face_dim) + " / " +
                         std::to_string(config.voice_dim));
  }
  if (face.rows() != voice.rows()) {
    throw DimensionError("project: face and voice batches are not row-aligned (" +
                         face.shape_string() + " vs " + voice.shape_string() + ")");
  }
  Projection p;
  p.face_lin = ops::affine(face, params.face_w, &params.face_b);
  p.voice_lin = ops::affine(voice, params.voice_w, &params.voice_b);
  p.u = ops::l2_normalize(p.face_lin);
  p.v = ops::l2_normalize(p.voice_lin);
  return p;
}

Matrix attention_scores(const Matrix& u, const Matrix& v, const FopParams& params) {
  return ops::sigmoid(ops::affine(ops::concat_cols(u, v), params.att_w, &params.att_b));
}

Matrix gated_fuse(const Matrix& u, const Matrix& v, const Matrix& k) {
  if (!u.same_shape(v) || !u.same_shape(k)) {
    throw DimensionError("gated_fuse: shapes " + u.shape_string() + ", " + v.shape_string() +
                         ", " + k.shape_string() + " differ");
  }
  const Matrix tu = ops::tanh(u);
  const Matrix tv = ops::tanh(v);
  Matrix out(u.rows(), u.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = k.data()[i];
    out.data()[i] = g * tu.data()[i] + (1.0 - g) * tv.data()[i];
  }
  return out;
}

Matrix linear_fuse(const Matrix& u, const Matrix& v) { return ops::add(u, v); }

ForwardCache forward(const Matrix& face, const Matrix& voice, const FopParams& params,
                     const FopConfig& config) {
  if (face.rows() == 0) throw DimensionError("forward: empty batch");
  ForwardCache c;
  c.face = face;
  c.voice = voice;
  c.proj = project(face, voice, params, config);
  if (config.fusion == FusionKind::kGated) {
    c.uv = ops::concat_cols(c.proj.u, c.proj.v);
    c.k = ops::sigmoid(ops::affine(c.uv, params.att_w, &params.att_b));
    c.tanh_u = ops::tanh(c.proj.u);
    c.tanh_v = ops::tanh(c.proj.v);
    c.fused = Matrix(c.k.rows(), c.k.cols());
    for (std::size_t i = 0; i < c.fused.size(); ++i) {
      const double g = c.k.data()[i];
      c.fused.data()[i] = g * c.tanh_u.data()[i] + (1.0 - g) * c.tanh_v.data()[i];
    }
  } else {
    c.fused = linear_fuse(c.proj.u, c.proj.v);
  }
  c.logits = ops::affine(c.fused, params.classifier, nullptr);
  return c;
}

namespace {

void accumulate(Matrix& into, const Matrix& g) {
  if (g.empty()) return;
  ops::axpy(into, 1.0, g);
}

}  // namespace

void backward(const ForwardCache& cache, const ForwardGrads& grads, FopParams& params,
              const FopConfig& config) {
  const std::size_t batch = cache.proj.u.rows();
  const std::size_t d = config.embed_dim;

  Matrix d_fused(batch, d);
  accumulate(d_fused, grads.fused);
  if (!grads.logits.empty()) {
    accumulate(d_fused, ops::affine_backward(cache.fused, params.classifier, nullptr,
                                             grads.logits));
  }

  Matrix du(batch, d);
  Matrix dv(batch, d);
  accumulate(du, grads.u);
  accumulate(dv, grads.v);

  if (config.fusion == FusionKind::kGated) {
    Matrix dk(batch, d);
    Matrix dtu(batch, d);
    Matrix dtv(batch, d);
    for (std::size_t i = 0; i < d_fused.size(); ++i) {
      const double g = d_fused.data()[i];
      const double k = cache.k.data()[i];
      dk.data()[i] = g * (cache.tanh_u.data()[i] - cache.tanh_v.data()[i]);
      dtu.data()[i] = g * k;
      dtv.data()[i] = g * (1.0 - k);
    }
    accumulate(du, ops::tanh_backward(cache.tanh_u, dtu));
    accumulate(dv, ops::tanh_backward(cache.tanh_v, dtv));
    const Matrix d_pre = ops::sigmoid_backward(cache.k, dk);
    const Matrix d_uv = ops::affine_backward(cache.uv, params.att_w, &params.att_b, d_pre);
    auto [du_att, dv_att] = ops::split_cols(d_uv, d);
    accumulate(du, du_att);
    accumulate(dv, dv_att);
  } else {
    accumulate(du, d_fused);
    accumulate(dv, d_fused);
  }

  const Matrix d_face_lin = ops::l2_normalize_backward(cache.proj.face_lin, du);
  const Matrix d_voice_lin = ops::l2_normalize_backward(cache.proj.voice_lin, dv);
  ops::affine_backward(cache.face, params.face_w, &params.face_b, d_face_lin);
  ops::affine_backward(cache.voice, params.voice_w, &params.voice_b, d_voice_lin);
}

Matrix embed_faces(const Matrix& face, const FopParams& params) {
  return ops::l2_normalize(ops::affine(face, params.face_w, &params.face_b));
}

Matrix embed_voices(const Matrix& voice, const FopParams& params) {
  return ops::l2_normalize(ops::affine(voice, params.voice_w, &params.voice_b));
}

}  // namespace fopkit
