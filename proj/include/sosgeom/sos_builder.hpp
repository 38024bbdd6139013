#pragma once

#include <vector>

#include "sosgeom/monomial.hpp"
#include "sosgeom/polynomial.hpp"
#include "sosgeom/sdp.hpp"

namespace sosgeom {

// Compiles polynomial identities with Gram-matrix unknowns into equality rows
// of an SdpProblem: one row per monomial of the identity space.
//
// A GramTerm contributes sum_{a<=b} (2 - delta_ab) * Q(a+off, b+off) * f_ab
// where f_ab is a polynomial attached to the basis pair (a, b).
struct SosProgramBuilder {
  SdpProblem prob;

  struct GramTerm {
    int block = -1;
    int index_offset = 0;
    // pair polynomials, indexed like the lower-triangular pair list (a <= b)
    std::vector<Monomial> basis;
    std::vector<Polynomial> pair_polys;  // size N(N+1)/2, ordered (0,0),(0,1)..(0,N-1),(1,1)..
  };

  int add_gram_block(int basis_size) { return prob.add_block(basis_size); }
  int add_free() { return prob.add_free(); }

  // f_ab = scale * b_a * b_b * mult  (mult in the identity space)
  static GramTerm multiplied(int block, const std::vector<Monomial>& basis,
                             const Polynomial& mult, double scale = 1.0, int index_offset = 0);
  // f_ab = scale * b_a * b_b, identity space = basis space
  static GramTerm plain(int block, const std::vector<Monomial>& basis, double scale = 1.0,
                        int index_offset = 0);
  // f_ab = scale * hessian_form(b_a * b_b); identity space has 2n variables
  static GramTerm hessian_mapped(int block, const std::vector<Monomial>& basis,
                                 double scale = 1.0, int index_offset = 0);

  // Emit rows for: sum(terms) + sum free_i * coef_i == target.
  void add_identity(const std::vector<GramTerm>& terms,
                    const std::vector<std::pair<int, Polynomial>>& free_terms,
                    const Polynomial& target);

  // Single scalar row helpers.
  LinearRow& new_row(double rhs);
  static void add_entry(LinearRow& row, int block, int r, int c, double v);
  static void add_rank_one(LinearRow& row, int block, const Eigen::VectorXd& z);
};

// Gram basis for certifying polynomials whose support is known in advance:
// starts from all monomials of degree <= ceil(maxdeg/2) and prunes candidates
// whose squares cannot appear (iterated diagonal-consistency / half Newton
// polytope reduction). `support` lists the exponent vectors that can carry
// nonzero coefficients in the certified polynomial.
std::vector<Monomial> reduced_gram_basis(int n_vars, const std::vector<Monomial>& support);

}  // namespace sosgeom
