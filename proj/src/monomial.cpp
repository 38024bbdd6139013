#include "sosgeom/monomial.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace sosgeom {

Monomial Monomial::var(int n_vars, int i, int power) {
  if (i < 0 || i >= n_vars) throw std::invalid_argument("Monomial::var: index out of range");
  std::vector<int> e(n_vars, 0);
  e[i] = power;
  return Monomial(std::move(e));
}

int Monomial::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (exponents.size() != other.exponents.size())
    throw std::invalid_argument("Monomial product: variable count mismatch");
  std::vector<int> e(exponents.size());
  for (size_t i = 0; i < e.size(); ++i) e[i] = exponents[i] + other.exponents[i];
  return Monomial(std::move(e));
}

double Monomial::eval(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(exponents.size()))
    throw std::invalid_argument("Monomial::eval: dimension mismatch");
  double v = 1.0;
  for (size_t i = 0; i < exponents.size(); ++i) {
    double b = x[static_cast<Eigen::Index>(i)];
    for (int k = 0; k < exponents[i]; ++k) v *= b;
  }
  return v;
}

std::string Monomial::str() const {
  std::string out;
  for (size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += "x" + std::to_string(i + 1);
    if (exponents[i] > 1) out += "^" + std::to_string(exponents[i]);
  }
  return out.empty() ? "1" : out;
}

bool graded_lex_less(const Monomial& a, const Monomial& b) {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  // Same degree: earlier variable with higher exponent sorts first.
  const size_t n = std::min(a.exponents.size(), b.exponents.size());
  for (size_t i = 0; i < n; ++i) {
    if (a.exponents[i] != b.exponents[i]) return a.exponents[i] > b.exponents[i];
  }
  return a.exponents.size() < b.exponents.size();
}

namespace {

void enumerate_rec(int n_vars, int max_deg, int pos, std::vector<int>& cur,
                   std::vector<Monomial>& out) {
  if (pos == n_vars) {
    out.emplace_back(cur);
    return;
  }
  int used = std::accumulate(cur.begin(), cur.begin() + pos, 0);
  for (int e = 0; e <= max_deg - used; ++e) {
    cur[pos] = e;
    enumerate_rec(n_vars, max_deg, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

std::vector<Monomial> all_monomials_up_to(int n_vars, int d) {
  std::vector<Monomial> out;
  std::vector<int> cur(n_vars, 0);
  enumerate_rec(n_vars, d, 0, cur, out);
  std::sort(out.begin(), out.end(), GradedLexLess{});
  return out;
}

}  // namespace

MonomialBasis MonomialBasis::up_to_degree(int n_vars, int d) {
  if (n_vars <= 0) throw std::invalid_argument("MonomialBasis: n_vars must be positive");
  if (d < 0) throw std::invalid_argument("MonomialBasis: degree must be nonnegative");
  MonomialBasis b;
  b.n_vars = n_vars;
  b.max_degree = d;
  b.monomials = all_monomials_up_to(n_vars, d);
  return b;
}

int MonomialBasis::index_of(const Monomial& m) const {
  auto it = std::lower_bound(monomials.begin(), monomials.end(), m, GradedLexLess{});
  if (it != monomials.end() && *it == m) return static_cast<int>(it - monomials.begin());
  return -1;
}

Eigen::VectorXd MonomialBasis::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z(size());
  for (int i = 0; i < size(); ++i) z[i] = monomials[static_cast<size_t>(i)].eval(x);
  return z;
}

HessianBasis HessianBasis::for_degree(int n_vars, int d) {
  if (n_vars <= 0 || d < 1) throw std::invalid_argument("HessianBasis: need n_vars>0, d>=1");
  HessianBasis b;
  b.n_vars = n_vars;
  b.degree = d;
  const auto xpart = all_monomials_up_to(n_vars, d - 1);
  for (const auto& xm : xpart) {
    for (int i = 0; i < n_vars; ++i) {
      std::vector<int> e(2 * n_vars, 0);
      std::copy(xm.exponents.begin(), xm.exponents.end(), e.begin());
      e[static_cast<size_t>(n_vars + i)] = 1;
      b.entries.emplace_back(std::move(e));
    }
  }
  std::sort(b.entries.begin(), b.entries.end(), GradedLexLess{});
  return b;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int PairTable::index_of(const Monomial& m) const {
  auto it = std::lower_bound(products.begin(), products.end(), m, GradedLexLess{});
  if (it != products.end() && *it == m) return static_cast<int>(it - products.begin());
  return -1;
}

PairTable coefficient_maps(const std::vector<Monomial>& basis) {
  std::map<Monomial, std::vector<std::pair<int, int>>, GradedLexLess> acc;
  const int n = static_cast<int>(basis.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      acc[basis[static_cast<size_t>(i)] * basis[static_cast<size_t>(j)]].emplace_back(i, j);
    }
  }
  PairTable t;
  t.products.reserve(acc.size());
  t.pairs.reserve(acc.size());
  for (auto& [m, ps] : acc) {
    t.products.push_back(m);
    t.pairs.push_back(std::move(ps));
  }
  return t;
}

}  // namespace sosgeom
