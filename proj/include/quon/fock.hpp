#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "quon/qcore.hpp"

namespace quon {

using cplx = std::complex<double>;
using FockVector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;

// K x K truncation of an operator on l2(N0), written in the e_n coordinates.
class TruncatedOperator {
 public:
  TruncatedOperator(DenseMatrix matrix, std::string label);

  int dim() const noexcept { return static_cast<int>(matrix_.rows()); }
  const DenseMatrix& matrix() const noexcept { return matrix_; }
  const std::string& label() const noexcept { return label_; }

  TruncatedOperator adjoint() const;
  FockVector apply(const FockVector& v) const;

  // Row-major, one "re,im" pair per cell, cells separated by ';'.
  void write_csv(std::ostream& os) const;

 private:
  DenseMatrix matrix_;
  std::string label_;
};

TruncatedOperator operator*(const TruncatedOperator& x, const TruncatedOperator& y);

// Basis vector e_n in dimension K.
FockVector basis_vector(int K, int n);

// <x, y>, conjugate-linear in x.
cplx inner(const FockVector& x, const FockVector& y);

TruncatedOperator make_identity(int K);

// Superdiagonal c with (c)_{k,k+1} = beta_k.
TruncatedOperator make_quon_c(const QParam& q, int K);

// XY - qYX.
TruncatedOperator qmutator(const TruncatedOperator& x, const TruncatedOperator& y,
                           const QParam& q);

// max_{n < k_safe} ||(XY - qYX - 1) e_n||.
double qmutator_residual(const TruncatedOperator& x, const TruncatedOperator& y,
                         const QParam& q, int k_safe);

// max_{n < k_safe} ||(X - Y) e_n||.
double column_residual(const DenseMatrix& x, const DenseMatrix& y, int k_safe);

}  // namespace quon
