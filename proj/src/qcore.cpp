#include "quon/qcore.hpp"

#include <cmath>
#include <sstream>

#include "quon/error.hpp"

namespace quon {

QParam::QParam(double q) : q_(q) {
  if (!std::isfinite(q)) fail(ErrorCode::InvalidArgument, "q must be finite");
}

void QParam::require_open_unit(const char* where) const {
  if (!in_open_unit()) {
    std::ostringstream os;
    os << where << ": q = " << q_ << " outside (0, 1)";
    fail(ErrorCode::Domain, os.str());
  }
}

double QParam::beta_sq_limit() const {
  require_open_unit("beta_sq_limit");
  return 1.0 / (1.0 - q_);
}

double beta_sq(const QParam& q, int n) {
  if (n < -1) fail(ErrorCode::InvalidArgument, "beta index must be >= -1");
  if (n == -1) return 0.0;
  const double qv = q.value();
  if (qv == 1.0) return static_cast<double>(n + 1);
  // 1 - q^{n+1} via expm1/log1p where it matters (q close to 1).
  if (qv > 0.0) {
    const double num = -std::expm1(static_cast<double>(n + 1) * std::log(qv));
    return num / (1.0 - qv);
  }
  return (1.0 - std::pow(qv, n + 1)) / (1.0 - qv);
}

double beta(const QParam& q, int n) {
  const double b2 = beta_sq(q, n);
  // q = -1 gives exact zeros; tiny negative rounding is clamped.
  return b2 > 0.0 ? std::sqrt(b2) : 0.0;
}

double beta_sq_recursive(const QParam& q, int n) {
  if (n < -1) fail(ErrorCode::InvalidArgument, "beta index must be >= -1");
  double b2 = 0.0;
  for (int k = 0; k <= n; ++k) b2 = 1.0 + q.value() * b2;
  return b2;
}

double q_factorial(const QParam& q, int n) {
  if (n < -1) fail(ErrorCode::InvalidArgument, "factorial index must be >= -1");
  double f = 1.0;
  for (int k = 1; k <= n; ++k) f *= beta(q, k);
  return f;
}

double q_number(const QParam& q, int n) { return beta_sq(q, n - 1); }

double q_number_factorial(const QParam& q, int n) {
  const double f = q_factorial(q, n - 1);
  return f * f;
}

double log_number_eigenvalue(const QParam& q, int n) {
  q.require_open_unit("log_number_eigenvalue");
  if (n < 0) fail(ErrorCode::InvalidArgument, "level must be >= 0");
  const double qv = q.value();
  // 1 - beta_{n-1}^2 (1-q) = q^n exactly; log1p keeps the small-n levels sharp.
  const double arg = -beta_sq(q, n - 1) * (1.0 - qv);
  return std::log1p(arg) / std::log(qv);
}

BetaSequence::BetaSequence(QParam q, int count) : q_(q) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "BetaSequence needs count >= 1");
  values_.resize(count);
  factorials_.resize(count);
  double f = 1.0;
  for (int n = 0; n < count; ++n) {
    values_[n] = beta(q_, n);
    if (n >= 1) f *= values_[n];
    factorials_[n] = f;
  }
}

double BetaSequence::value(int n) const {
  if (n == -1) return 0.0;
  if (n < -1 || n >= size()) fail(ErrorCode::InvalidArgument, "beta index out of range");
  return values_[n];
}

double BetaSequence::factorial(int n) const {
  if (n == -1) return 1.0;
  if (n < -1 || n >= size()) fail(ErrorCode::InvalidArgument, "factorial index out of range");
  return factorials_[n];
}

}  // namespace quon
