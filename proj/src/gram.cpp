#include "sosgeom/gram.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace sosgeom {

const char* to_string(GramKind k) {
  return k == GramKind::Sos ? "sos" : "sos-convex";
}

std::vector<Monomial> GramCertificate::basis_monomials() const {
  if (kind == GramKind::Sos) {
    return MonomialBasis::up_to_degree(n_vars, basis_degree).monomials;
  }
  return HessianBasis::for_degree(n_vars, basis_degree).entries;
}

Polynomial gram_expand(const std::vector<Monomial>& basis, const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(basis.size());
  if (Q.rows() != n || Q.cols() != n) throw std::invalid_argument("gram_expand: size mismatch");
  const int nv = basis.empty() ? 1 : basis[0].n_vars();
  Polynomial p(nv);
  for (int i = 0; i < n; ++i) {
    const auto& bi = basis[static_cast<size_t>(i)];
    p.add_term(bi * bi, Q(i, i));
    for (int j = i + 1; j < n; ++j) {
      p.add_term(bi * basis[static_cast<size_t>(j)], 2.0 * Q(i, j));
    }
  }
  return p;
}

Polynomial gram_expand(const GramCertificate& cert) {
  return gram_expand(cert.basis_monomials(), cert.matrix);
}

Polynomial GramCertificate::expand() const { return gram_expand(*this); }

double GramCertificate::min_eigenvalue() const {
  if (matrix.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool GramCertificate::certifies(const Polynomial& p, double eps_coef) const {
  const Polynomial target = kind == GramKind::Sos ? p : p.hessian_form();
  return expand().almost_equal(target, eps_coef);
}

namespace {

int index_in_sorted(const std::vector<Monomial>& basis, const Monomial& m) {
  auto it = std::lower_bound(basis.begin(), basis.end(), m, GradedLexLess{});
  if (it != basis.end() && *it == m) return static_cast<int>(it - basis.begin());
  return -1;
}

}  // namespace

GramCertificate transform_certificate(const GramCertificate& cert, const Eigen::MatrixXd& A,
                                      const Eigen::VectorXd& b) {
  const int n = cert.n_vars;
  if (A.rows() != n || A.cols() != n || b.size() != n)
    throw std::invalid_argument("transform_certificate: shape mismatch");

  const auto basis = cert.basis_monomials();
  const int N = static_cast<int>(basis.size());
  const int space = cert.kind == GramKind::Sos ? n : 2 * n;

  // Substitution acting on the full variable space: x -> Ax+b, and for the
  // Hessian form also y -> Ay.
  Eigen::MatrixXd As = Eigen::MatrixXd::Zero(space, space);
  Eigen::VectorXd bs = Eigen::VectorXd::Zero(space);
  As.topLeftCorner(n, n) = A;
  bs.head(n) = b;
  if (cert.kind == GramKind::SosConvex) As.bottomRightCorner(n, n) = A;

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
  for (int j = 0; j < N; ++j) {
    Polynomial mj(space);
    mj.add_term(basis[static_cast<size_t>(j)], 1.0);
    const Polynomial img = mj.substitute_affine(As, bs);
    for (const auto& [m, c] : img.terms()) {
      const int i = index_in_sorted(basis, m);
      if (i < 0) throw std::logic_error("transform_certificate: image leaves basis span");
      T(i, j) = c;
    }
  }
  // Image column j holds basis_j(Ax+b) in basis coordinates, so the basis
  // vector transforms as z(Ax+b) = T^T z(x) and the Gram matrix by T Q T^T.
  GramCertificate out = cert;
  out.matrix = T * cert.matrix * T.transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

GramCertificate scale_certificate(const GramCertificate& cert, double s) {
  if (s < 0) throw std::invalid_argument("scale_certificate: negative scale breaks PSD-ness");
  GramCertificate out = cert;
  out.matrix *= s;
  return out;
}

}  // namespace sosgeom
