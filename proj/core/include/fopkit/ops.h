#pragma once

// Differentiable building blocks. Every forward op has a matching *_backward
// that maps the gradient of a scalar loss wrt the op output onto its inputs.
// Parameters receive accumulated (+=) gradients; input gradients are returned.

#include <span>
#include <utility>

#include "fopkit/matrix.h"

namespace fopkit::ops {

inline constexpr double kNormEps = 1e-12;

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
// a += s * b
void axpy(Matrix& a, double s, const Matrix& b);

/// out = x * w + bias (bias broadcast per row; pass nullptr for no bias).
Matrix affine(const Matrix& x, const Parameter& w, const Parameter* bias);
/// Accumulates into w.grad (and bias->grad) and returns dL/dx.
Matrix affine_backward(const Matrix& x, Parameter& w, Parameter* bias, const Matrix& grad_out);

/// Each row divided by max(||row||, eps).
Matrix l2_normalize(const Matrix& x, double eps = kNormEps);
Matrix l2_normalize_backward(const Matrix& x, const Matrix& grad_out, double eps = kNormEps);

Matrix sigmoid(const Matrix& x);
// Takes the forward output y = sigmoid(x).
Matrix sigmoid_backward(const Matrix& y, const Matrix& grad_out);

Matrix tanh(const Matrix& x);
// Takes the forward output y = tanh(x).
Matrix tanh_backward(const Matrix& y, const Matrix& grad_out);

Matrix hadamard(const Matrix& a, const Matrix& b);
// Returns (dL/da, dL/db).
std::pair<Matrix, Matrix> hadamard_backward(const Matrix& a, const Matrix& b,
                                            const Matrix& grad_out);

Matrix concat_cols(const Matrix& left, const Matrix& right);
// Inverse of concat_cols: first `left_cols` columns, then the rest.
std::pair<Matrix, Matrix> split_cols(const Matrix& m, std::size_t left_cols);

struct CrossEntropy {
  double value = 0.0;  // mean over rows
  Matrix grad_logits;  // (softmax - onehot) / B
};

/// Mean softmax cross-entropy over rows, via log-sum-exp.
CrossEntropy softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

struct Cosine {
  double value = 0.0;
  bool degenerate = false;  // an input had zero norm
};

/// a.b / (|a||b|), clamped to [-1, 1]. Zero-norm input gives 0 flagged degenerate.
Cosine cosine_sim(std::span<const double> a, std::span<const double> b);

/// Adds g * d cos(a,b)/da to grad_a and g * d cos(a,b)/db to grad_b. Zero-norm
/// operands receive no gradient.
void cosine_backward(std::span<const double> a, std::span<const double> b, double g,
                     std::span<double> grad_a, std::span<double> grad_b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace fopkit::ops
