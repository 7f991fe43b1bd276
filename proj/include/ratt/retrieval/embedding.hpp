#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "ratt/core/error.hpp"

namespace ratt {

template <typename Scalar>
using Embedding = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Stored and transported embeddings are single precision; all similarity
/// arithmetic is carried out in double.
using EmbeddingVector = Embedding<float>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

/// Cosine similarity of two equally sized vectors, clamped to [-1, 1].
///
/// Both operands are evaluated into fresh double-precision temporaries before
/// the reduction. Heap temporaries are always aligned, so the summation order
/// (and therefore the exact bit pattern of the result) depends only on the
/// values and never on where the caller's storage happens to live. Retrieval
/// relies on this to agree exactly with a per-pair evaluation.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::invalid_input, "dimension mismatch: " + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()));
  }
  const Eigen::VectorXd x = a.derived().template cast<double>();
  const Eigen::VectorXd y = b.derived().template cast<double>();
  const double nx = x.norm();
  const double ny = y.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) {
    throw Error(ErrorKind::degenerate_vector, "cosine similarity of a zero-norm vector");
  }
  return std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
}

/// Returns v / |v|; throws degenerate_vector for a zero vector.
template <typename Derived>
Embedding<typename Derived::Scalar> normalized(const Eigen::MatrixBase<Derived>& v) {
  const double n = v.derived().template cast<double>().norm();
  if (!(n > 0.0)) throw Error(ErrorKind::degenerate_vector, "cannot normalize a zero vector");
  return (v.derived().template cast<double>() / n).template cast<typename Derived::Scalar>();
}

}  // namespace ratt
