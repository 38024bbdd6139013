#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace sosgeom {

// Exponent vector of a monomial in a fixed number of variables.
struct Monomial {
  std::vector<int> exponents;

  Monomial() = default;
  explicit Monomial(std::vector<int> e) : exponents(std::move(e)) {}
  Monomial(std::initializer_list<int> e) : exponents(e) {}

  static Monomial unit(int n_vars) { return Monomial(std::vector<int>(n_vars, 0)); }
  static Monomial var(int n_vars, int i, int power = 1);

  int n_vars() const { return static_cast<int>(exponents.size()); }
  int degree() const;
  bool is_constant() const { return degree() == 0; }

  Monomial operator*(const Monomial& other) const;
  bool operator==(const Monomial& other) const { return exponents == other.exponents; }

  double eval(const Eigen::VectorXd& x) const;
  std::string str() const;
};

// Canonical order used everywhere a monomial list is serialized: lower total
// degree first; within a degree, earlier variables with higher exponents come
// first, so bases read (1, x1, x2, ..., x1^2, x1*x2, ...).
bool graded_lex_less(const Monomial& a, const Monomial& b);

struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return graded_lex_less(a, b); }
};

// All monomials of degree <= max_degree in canonical order; z(x) in Gram terms.
struct MonomialBasis {
  int n_vars = 0;
  int max_degree = 0;
  std::vector<Monomial> monomials;

  static MonomialBasis up_to_degree(int n_vars, int d);

  int size() const { return static_cast<int>(monomials.size()); }
  int index_of(const Monomial& m) const;  // -1 if absent
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
};

// Basis w(x,y) for the Gram form of y^T H(x) y: monomials in 2n variables
// (x first, then y) of degree exactly 1 in y and at most degree-1 in x.
struct HessianBasis {
  int n_vars = 0;
  int degree = 0;  // d for a polynomial of degree 2d
  std::vector<Monomial> entries;

  static HessianBasis for_degree(int n_vars, int d);

  int size() const { return static_cast<int>(entries.size()); }
};

// binomial(n, k) as a double-checked integer; small arguments only.
long long binomial(int n, int k);

// For each product monomial mu of basis[i]*basis[j], the index pairs (i,j),
// i <= j, that produce it. Products are listed in canonical order and the
// pair sets partition all N(N+1)/2 pairs.
struct PairTable {
  std::vector<Monomial> products;
  std::vector<std::vector<std::pair<int, int>>> pairs;

  int size() const { return static_cast<int>(products.size()); }
  int index_of(const Monomial& m) const;
};

PairTable coefficient_maps(const std::vector<Monomial>& basis);

}  // namespace sosgeom
