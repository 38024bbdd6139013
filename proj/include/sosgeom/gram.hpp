#pragma once

#include <Eigen/Core>
#include <vector>

#include "sosgeom/monomial.hpp"
#include "sosgeom/polynomial.hpp"

namespace sosgeom {

enum class GramKind {
  Sos,        // p(x) = z(x)^T Q z(x), z = monomials of degree <= basis_degree
  SosConvex,  // y^T H2p(x) y = w(x,y)^T Q w(x,y), w = HessianBasis(n_vars, basis_degree)
};

const char* to_string(GramKind k);

// PSD matrix plus the monomial basis it is expressed over. The basis is
// regenerated from (kind, n_vars, basis_degree), so certificates serialize as
// just the matrix and three scalars.
struct GramCertificate {
  GramKind kind = GramKind::Sos;
  int n_vars = 0;
  int basis_degree = 0;
  Eigen::MatrixXd matrix;

  std::vector<Monomial> basis_monomials() const;

  // z^T Q z collected in canonical monomial order. Lives in n_vars variables
  // for Sos and in 2*n_vars for SosConvex.
  Polynomial expand() const;

  double min_eigenvalue() const;

  // Kind-aware check: Sos certificates are compared against p itself,
  // SosConvex ones against hessian_form(p).
  bool certifies(const Polynomial& p, double eps_coef) const;
};

// Expand an arbitrary symmetric matrix over an explicit basis.
Polynomial gram_expand(const std::vector<Monomial>& basis, const Eigen::MatrixXd& Q);

Polynomial gram_expand(const GramCertificate& cert);

// Image of a certificate under x -> A x + b: returns T^T Q T where T is the
// matrix of the substitution acting on the monomial basis, so the new matrix
// certifies p(A x + b). Requires A invertible only in the sense that the
// substituted basis stays within the same degree (always true for affine maps).
GramCertificate transform_certificate(const GramCertificate& cert, const Eigen::MatrixXd& A,
                                      const Eigen::VectorXd& b);

// Scale a certificate so it certifies s * p.
GramCertificate scale_certificate(const GramCertificate& cert, double s);

}  // namespace sosgeom
