#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

#include "sosgeom/monomial.hpp"

namespace sosgeom {

// Sparse multivariate polynomial: exponent vector -> coefficient. No stored
// zero coefficients; evaluation is plain term-by-term arithmetic.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(int n_vars);

  static Polynomial constant(int n_vars, double c);
  static Polynomial variable(int n_vars, int i);
  static Polynomial from_terms(int n_vars, const std::vector<std::pair<Monomial, double>>& terms);

  int n_vars() const { return n_vars_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  int term_count() const { return static_cast<int>(terms_.size()); }
  const TermMap& terms() const { return terms_; }

  void add_term(const Monomial& m, double c);
  double coeff(const Monomial& m) const;
  double max_abs_coeff() const;

  double eval(const Eigen::VectorXd& x) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial& operator+=(const Polynomial& other);

  Polynomial derivative(int i) const;

  // Entries of the symmetric Hessian matrix, row-major n x n.
  std::vector<Polynomial> hessian() const;

  // y^T H(x) y as a polynomial in 2n variables (x1..xn, y1..yn).
  Polynomial hessian_form() const;

  // p(A x + b); exact expansion in the monomial basis.
  Polynomial substitute_affine(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const;

  // Same polynomial seen in a larger variable space; variable i becomes
  // variable i + offset.
  Polynomial embed(int new_n_vars, int offset) const;

  // Gradient as numeric vector at x.
  Eigen::VectorXd gradient_at(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian_at(const Eigen::VectorXd& x) const;

  // Drop coefficients with |c| <= eps.
  Polynomial trimmed(double eps) const;

  bool almost_equal(const Polynomial& other, double eps) const;
  std::string str() const;

 private:
  int n_vars_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

}  // namespace sosgeom
