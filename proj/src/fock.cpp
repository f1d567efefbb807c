#include "quon/fock.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "quon/error.hpp"

namespace quon {

TruncatedOperator::TruncatedOperator(DenseMatrix matrix, std::string label)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  if (matrix_.rows() != matrix_.cols())
    fail(ErrorCode::DimensionMismatch, "operator matrix must be square");
  if (!matrix_.allFinite())
    fail(ErrorCode::InvalidArgument, "operator '" + label_ + "' has non-finite entries");
}

TruncatedOperator TruncatedOperator::adjoint() const {
  return TruncatedOperator(matrix_.adjoint(), label_ + "_dagger");
}

FockVector TruncatedOperator::apply(const FockVector& v) const {
  if (v.size() != matrix_.cols())
    fail(ErrorCode::DimensionMismatch, "vector size does not match operator '" + label_ + "'");
  return matrix_ * v;
}

void TruncatedOperator::write_csv(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix_.cols(); ++c) {
      if (c) os << ';';
      os << matrix_(r, c).real() << ',' << matrix_(r, c).imag();
    }
    os << '\n';
  }
  os.precision(old_precision);
}

TruncatedOperator operator*(const TruncatedOperator& x, const TruncatedOperator& y) {
  if (x.dim() != y.dim()) fail(ErrorCode::DimensionMismatch, "operator product: dimension mismatch");
  return TruncatedOperator(x.matrix() * y.matrix(), x.label() + "*" + y.label());
}

FockVector basis_vector(int K, int n) {
  if (n < 0 || n >= K) fail(ErrorCode::InvalidArgument, "basis index out of range");
  FockVector e = FockVector::Zero(K);
  e(n) = 1.0;
  return e;
}

cplx inner(const FockVector& x, const FockVector& y) {
  if (x.size() != y.size()) fail(ErrorCode::DimensionMismatch, "inner product: size mismatch");
  return x.dot(y);  // Eigen conjugates the left operand
}

TruncatedOperator make_identity(int K) {
  if (K < 1) fail(ErrorCode::InvalidArgument, "dimension must be positive");
  return TruncatedOperator(DenseMatrix::Identity(K, K), "I");
}

TruncatedOperator make_quon_c(const QParam& q, int K) {
  if (K < 2) fail(ErrorCode::InvalidArgument, "make_quon_c needs K >= 2");
  DenseMatrix c = DenseMatrix::Zero(K, K);
  for (int k = 0; k + 1 < K; ++k) c(k, k + 1) = beta(q, k);
  return TruncatedOperator(std::move(c), "c");
}

TruncatedOperator qmutator(const TruncatedOperator& x, const TruncatedOperator& y,
                           const QParam& q) {
  if (x.dim() != y.dim()) fail(ErrorCode::DimensionMismatch, "qmutator: dimension mismatch");
  DenseMatrix m = x.matrix() * y.matrix() - q.value() * (y.matrix() * x.matrix());
  return TruncatedOperator(std::move(m), "[" + x.label() + "," + y.label() + "]_q");
}

double column_residual(const DenseMatrix& x, const DenseMatrix& y, int k_safe) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    fail(ErrorCode::DimensionMismatch, "column_residual: shape mismatch");
  if (k_safe < 0 || k_safe > x.cols()) fail(ErrorCode::InvalidArgument, "column_residual: bad k_safe");
  double worst = 0.0;
  for (int n = 0; n < k_safe; ++n) worst = std::max(worst, (x.col(n) - y.col(n)).norm());
  return worst;
}

double qmutator_residual(const TruncatedOperator& x, const TruncatedOperator& y,
                         const QParam& q, int k_safe) {
  if (k_safe >= x.dim() || k_safe < 1) {
    std::ostringstream os;
    os << "qmutator_residual: k_safe = " << k_safe << " must lie in [1, " << x.dim() << ")";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  const auto m = qmutator(x, y, q);
  return column_residual(m.matrix(), DenseMatrix::Identity(x.dim(), x.dim()), k_safe);
}

}  // namespace quon
