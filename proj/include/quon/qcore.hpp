#pragma once

#include <vector>

namespace quon {

// Deformation parameter. Algebraic code accepts any real q; the bi-coherent
// machinery requires 0 < q < 1 and checks it via require_open_unit().
class QParam {
 public:
  explicit QParam(double q);

  double value() const noexcept { return q_; }
  bool in_open_unit() const noexcept { return q_ > 0.0 && q_ < 1.0; }
  void require_open_unit(const char* where) const;

  // 1/(1-q), the limit of beta_n^2 for 0 < q < 1.
  double beta_sq_limit() const;

 private:
  double q_;
};

// beta_n^2 = (1 - q^{n+1})/(1 - q), or n+1 at q = 1; beta_{-1} = 0.
double beta_sq(const QParam& q, int n);
double beta(const QParam& q, int n);

// Same quantity through beta_n^2 = 1 + q beta_{n-1}^2. Kept as a cross-check.
double beta_sq_recursive(const QParam& q, int n);

// beta_n! = beta_n beta_{n-1} ... beta_1, with beta_{-1}! = beta_0! = 1.
double q_factorial(const QParam& q, int n);

// [n] = beta_{n-1}^2 and [n]! = (beta_{n-1}!)^2.
double q_number(const QParam& q, int n);
double q_number_factorial(const QParam& q, int n);

// (1/log q) log(1 - beta_{n-1}^2 (1-q)); equals n for 0 < q < 1.
double log_number_eigenvalue(const QParam& q, int n);

// Cached beta_n and beta_n! for n = 0..count-1.
class BetaSequence {
 public:
  BetaSequence(QParam q, int count);

  const QParam& q() const noexcept { return q_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }

  // Index -1 is accepted and returns beta_{-1} = 0 / beta_{-1}! = 1.
  double value(int n) const;
  double factorial(int n) const;

 private:
  QParam q_;
  std::vector<double> values_;
  std::vector<double> factorials_;
};

}  // namespace quon
