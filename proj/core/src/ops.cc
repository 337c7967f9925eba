#include "fopkit/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fopkit/errors.h"

namespace fopkit::ops {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + a.shape_string() + " * " +
                         b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * bk[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& x : out.data()) x *= s;
  return out;
}

void axpy(Matrix& a, double s, const Matrix& b) {
  require_same_shape(a, b, "axpy");
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += s * b.data()[i];
}

Matrix affine(const Matrix& x, const Parameter& w, const Parameter* bias) {
  if (x.cols() != w.value.rows()) {
    throw DimensionError("affine '" + w.name + "': input " + x.shape_string() +
                         " does not conform to weight " + w.value.shape_string());
  }
  Matrix out = matmul(x, w.value);
  if (bias != nullptr) {
    if (bias->value.rows() != 1 || bias->value.cols() != w.value.cols()) {
      throw DimensionError("affine '" + bias->name + "': bias " + bias->value.shape_string() +
                           " does not conform to weight " + w.value.shape_string());
    }
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bias->value(0, j);
  }
  return out;
}

Matrix affine_backward(const Matrix& x, Parameter& w, Parameter* bias, const Matrix& grad_out) {
  if (grad_out.rows() != x.rows() || grad_out.cols() != w.value.cols()) {
    throw DimensionError("affine_backward '" + w.name + "': grad " + grad_out.shape_string() +
                         " does not match output " + std::to_string(x.rows()) + "x" +
                         std::to_string(w.value.cols()));
  }
  // dW += x^T g
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const double* g = grad_out.row(b).data();
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double xi = x(b, i);
      if (xi == 0.0) continue;
      double* wg = w.grad.row(i).data();
      for (std::size_t j = 0; j < grad_out.cols(); ++j) wg[j] += xi * g[j];
    }
  }
  if (bias != nullptr) {
    for (std::size_t b = 0; b < grad_out.rows(); ++b)
      for (std::size_t j = 0; j < grad_out.cols(); ++j) bias->grad(0, j) += grad_out(b, j);
  }
  // dx = g W^T
  Matrix grad_x(x.rows(), x.cols());
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const double* g = grad_out.row(b).data();
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double* wi = w.value.row(i).data();
      double acc = 0.0;
      for (std::size_t j = 0; j < grad_out.cols(); ++j) acc += g[j] * wi[j];
      grad_x(b, i) = acc;
    }
  }
  return grad_x;
}

Matrix l2_normalize(const Matrix& x, double eps) {
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double denom = std::max(norm(x.row(r)), eps);
    for (double& v : out.row(r)) v /= denom;
  }
  return out;
}

Matrix l2_normalize_backward(const Matrix& x, const Matrix& grad_out, double eps) {
  require_same_shape(x, grad_out, "l2_normalize_backward");
  Matrix grad_x(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    const auto gr = grad_out.row(r);
    auto out = grad_x.row(r);
    const double n = norm(xr);
    if (n < eps) {
      // Below the guard the op is x / eps, a linear map.
      for (std::size_t c = 0; c < xr.size(); ++c) out[c] = gr[c] / eps;
      continue;
    }
    // d(x/|x|) = (g - y (y.g)) / |x|
    const double yg = dot(xr, gr) / n;
    for (std::size_t c = 0; c < xr.size(); ++c) out[c] = (gr[c] - (xr[c] / n) * yg) / n;
  }
  return grad_x;
}

Matrix sigmoid(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data()) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  return out;
}

Matrix sigmoid_backward(const Matrix& y, const Matrix& grad_out) {
  require_same_shape(y, grad_out, "sigmoid_backward");
  Matrix out(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double s = y.data()[i];
    out.data()[i] = grad_out.data()[i] * s * (1.0 - s);
  }
  return out;
}

Matrix tanh(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data()) v = std::tanh(v);
  return out;
}

Matrix tanh_backward(const Matrix& y, const Matrix& grad_out) {
  require_same_shape(y, grad_out, "tanh_backward");
  Matrix out(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = y.data()[i];
    out.data()[i] = grad_out.data()[i] * (1.0 - t * t);
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

std::pair<Matrix, Matrix> hadamard_backward(const Matrix& a, const Matrix& b,
                                            const Matrix& grad_out) {
  require_same_shape(a, grad_out, "hadamard_backward");
  return {hadamard(grad_out, b), hadamard(grad_out, a)};
}

Matrix concat_cols(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) {
    throw DimensionError("concat_cols: row mismatch " + left.shape_string() + " vs " +
                         right.shape_string());
  }
  Matrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t r = 0; r < left.rows(); ++r) {
    auto o = out.row(r);
    std::copy(left.row(r).begin(), left.row(r).end(), o.begin());
    std::copy(right.row(r).begin(), right.row(r).end(), o.begin() + left.cols());
  }
  return out;
}

std::pair<Matrix, Matrix> split_cols(const Matrix& m, std::size_t left_cols) {
  if (left_cols > m.cols()) {
    throw DimensionError("split_cols: " + std::to_string(left_cols) + " exceeds " +
                         m.shape_string());
  }
  Matrix left(m.rows(), left_cols);
  Matrix right(m.rows(), m.cols() - left_cols);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin(), src.begin() + left_cols, left.row(r).begin());
    std::copy(src.begin() + left_cols, src.end(), right.row(r).begin());
  }
  return {std::move(left), std::move(right)};
}

CrossEntropy softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for logits " + logits.shape_string());
  }
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  CrossEntropy ce;
  ce.grad_logits = Matrix(batch, classes);
  if (batch == 0) return ce;
  double total = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw DataError("label " + std::to_string(y) + " out of range for " +
                      std::to_string(classes) + " classes");
    }
    const auto z = logits.row(r);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    total += lse - z[y];
    auto g = ce.grad_logits.row(r);
    for (std::size_t c = 0; c < classes; ++c) g[c] = std::exp(z[c] - lse) / batch;
    g[y] -= 1.0 / batch;
  }
  ce.value = total / batch;
  return ce;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Cosine cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine_sim: length mismatch " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  return {std::clamp(dot(a, b) / (na * nb), -1.0, 1.0), false};
}

void cosine_backward(std::span<const double> a, std::span<const double> b, double g,
                     std::span<double> grad_a, std::span<double> grad_b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return;
  const double c = dot(a, b) / (na * nb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    grad_a[i] += g * (b[i] / (na * nb) - c * a[i] / (na * na));
    grad_b[i] += g * (a[i] / (na * nb) - c * b[i] / (nb * nb));
  }
}

}  // namespace fopkit::ops
