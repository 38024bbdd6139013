#include "sosgeom/sos_builder.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace sosgeom {

namespace {

size_t pair_count(size_t n) { return n * (n + 1) / 2; }

}  // namespace

SosProgramBuilder::GramTerm SosProgramBuilder::multiplied(int block,
                                                          const std::vector<Monomial>& basis,
                                                          const Polynomial& mult, double scale,
                                                          int index_offset) {
  GramTerm t;
  t.block = block;
  t.index_offset = index_offset;
  t.basis = basis;
  t.pair_polys.reserve(pair_count(basis.size()));
  const int N = static_cast<int>(basis.size());
  for (int a = 0; a < N; ++a) {
    for (int b = a; b < N; ++b) {
      Polynomial prod(mult.n_vars());
      const Monomial m = basis[static_cast<size_t>(a)] * basis[static_cast<size_t>(b)];
      for (const auto& [mm, cc] : mult.terms()) prod.add_term(m * mm, cc * scale);
      t.pair_polys.push_back(std::move(prod));
    }
  }
  return t;
}

SosProgramBuilder::GramTerm SosProgramBuilder::plain(int block, const std::vector<Monomial>& basis,
                                                     double scale, int index_offset) {
  const int nv = basis.empty() ? 1 : basis[0].n_vars();
  return multiplied(block, basis, Polynomial::constant(nv, 1.0), scale, index_offset);
}

SosProgramBuilder::GramTerm SosProgramBuilder::hessian_mapped(int block,
                                                              const std::vector<Monomial>& basis,
                                                              double scale, int index_offset) {
  GramTerm t;
  t.block = block;
  t.index_offset = index_offset;
  t.basis = basis;
  const int N = static_cast<int>(basis.size());
  const int nv = basis.empty() ? 1 : basis[0].n_vars();
  t.pair_polys.reserve(pair_count(basis.size()));
  for (int a = 0; a < N; ++a) {
    for (int b = a; b < N; ++b) {
      Polynomial prod(nv);
      prod.add_term(basis[static_cast<size_t>(a)] * basis[static_cast<size_t>(b)], scale);
      t.pair_polys.push_back(prod.hessian_form());
    }
  }
  return t;
}

void SosProgramBuilder::add_identity(const std::vector<GramTerm>& terms,
                                     const std::vector<std::pair<int, Polynomial>>& free_terms,
                                     const Polynomial& target) {
  // union of monomials across all contributions
  std::set<Monomial, GradedLexLess> monos;
  for (const auto& t : terms)
    for (const auto& f : t.pair_polys)
      for (const auto& [m, c] : f.terms()) {
        (void)c;
        monos.insert(m);
      }
  for (const auto& [idx, f] : free_terms) {
    (void)idx;
    for (const auto& [m, c] : f.terms()) {
      (void)c;
      monos.insert(m);
    }
  }
  for (const auto& [m, c] : target.terms()) {
    (void)c;
    monos.insert(m);
  }

  std::map<Monomial, int, GradedLexLess> row_of;
  const int first_row = static_cast<int>(prob.rows.size());
  for (const auto& m : monos) {
    row_of.emplace(m, static_cast<int>(prob.rows.size()));
    LinearRow row;
    row.rhs = target.coeff(m);
    prob.rows.push_back(std::move(row));
  }

  for (const auto& t : terms) {
    if (t.pair_polys.size() != pair_count(t.basis.size()))
      throw std::invalid_argument("add_identity: malformed GramTerm");
    // per-row entry accumulation for this term's block
    std::map<int, std::map<std::pair<int, int>, double>> acc;  // row -> (r,c) -> v
    const int N = static_cast<int>(t.basis.size());
    size_t pi = 0;
    for (int a = 0; a < N; ++a) {
      for (int b = a; b < N; ++b, ++pi) {
        for (const auto& [m, c] : t.pair_polys[pi].terms()) {
          const int r = row_of.at(m);
          acc[r][{a + t.index_offset, b + t.index_offset}] += c;
        }
      }
    }
    for (auto& [r, entries] : acc) {
      BlockCoeff bc;
      bc.block = t.block;
      for (auto& [rc, v] : entries) {
        if (v != 0.0) bc.entries.push_back({rc.first, rc.second, v});
      }
      if (!bc.entries.empty()) prob.rows[static_cast<size_t>(r)].blocks.push_back(std::move(bc));
    }
  }
  for (const auto& [idx, f] : free_terms) {
    for (const auto& [m, c] : f.terms()) {
      prob.rows[static_cast<size_t>(row_of.at(m))].free_terms.emplace_back(idx, c);
    }
  }
  (void)first_row;
}

LinearRow& SosProgramBuilder::new_row(double rhs) {
  LinearRow row;
  row.rhs = rhs;
  prob.rows.push_back(std::move(row));
  return prob.rows.back();
}

void SosProgramBuilder::add_entry(LinearRow& row, int block, int r, int c, double v) {
  for (auto& bc : row.blocks) {
    if (bc.block == block) {
      bc.entries.push_back({r, c, v});
      return;
    }
  }
  BlockCoeff bc;
  bc.block = block;
  bc.entries.push_back({r, c, v});
  row.blocks.push_back(std::move(bc));
}

void SosProgramBuilder::add_rank_one(LinearRow& row, int block, const Eigen::VectorXd& z) {
  BlockCoeff bc;
  bc.block = block;
  bc.rank_one = true;
  bc.z = z;
  row.blocks.push_back(std::move(bc));
}

std::vector<Monomial> reduced_gram_basis(int n_vars, const std::vector<Monomial>& support) {
  int maxdeg = 0;
  for (const auto& m : support) maxdeg = std::max(maxdeg, m.degree());
  const int d = (maxdeg + 1) / 2;
  std::vector<Monomial> cand = MonomialBasis::up_to_degree(n_vars, d).monomials;
  std::set<Monomial, GradedLexLess> supp(support.begin(), support.end());

  // Iterated diagonal consistency: drop beta when 2*beta is not in the
  // support and cannot be written as a sum of two other surviving candidates.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Monomial> next;
    next.reserve(cand.size());
    for (const auto& beta : cand) {
      const Monomial sq = beta * beta;
      bool keep = supp.count(sq) > 0;
      if (!keep) {
        // does any other pair produce 2*beta?
        for (size_t i = 0; i < cand.size() && !keep; ++i) {
          if (cand[i] == beta) continue;
          // need partner = sq / cand[i]
          Monomial partner;
          partner.exponents.resize(static_cast<size_t>(n_vars));
          bool ok = true;
          for (int v = 0; v < n_vars; ++v) {
            int e = sq.exponents[static_cast<size_t>(v)] - cand[i].exponents[static_cast<size_t>(v)];
            if (e < 0) {
              ok = false;
              break;
            }
            partner.exponents[static_cast<size_t>(v)] = e;
          }
          if (!ok || partner == beta) continue;
          if (std::binary_search(cand.begin(), cand.end(), partner, GradedLexLess{})) keep = true;
        }
      }
      if (keep) next.push_back(beta);
      else changed = true;
    }
    cand = std::move(next);
  }
  return cand;
}

}  // namespace sosgeom
