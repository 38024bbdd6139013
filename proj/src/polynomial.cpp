#include "sosgeom/polynomial.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sosgeom {

Polynomial::Polynomial(int n_vars) : n_vars_(n_vars) {
  if (n_vars <= 0) throw std::invalid_argument("Polynomial: n_vars must be positive");
}

Polynomial Polynomial::constant(int n_vars, double c) {
  Polynomial p(n_vars);
  p.add_term(Monomial::unit(n_vars), c);
  return p;
}

Polynomial Polynomial::variable(int n_vars, int i) {
  Polynomial p(n_vars);
  p.add_term(Monomial::var(n_vars, i), 1.0);
  return p;
}

Polynomial Polynomial::from_terms(int n_vars,
                                  const std::vector<std::pair<Monomial, double>>& terms) {
  Polynomial p(n_vars);
  for (const auto& [m, c] : terms) p.add_term(m, c);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (m.n_vars() != n_vars_) throw std::invalid_argument("add_term: variable count mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coeff() const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
  return v;
}

double Polynomial::eval(const Eigen::VectorXd& x) const {
  if (x.size() != n_vars_) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.eval(x);
  return v;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial r = *this;
  r += other;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.n_vars_ != n_vars_) throw std::invalid_argument("polynomial add: n_vars mismatch");
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + (other * -1.0); }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (other.n_vars_ != n_vars_) throw std::invalid_argument("polynomial mul: n_vars mismatch");
  Polynomial r(n_vars_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      r.add_term(ma * mb, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(n_vars_);
  if (s == 0.0) return r;
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
  return r;
}

Polynomial Polynomial::derivative(int i) const {
  if (i < 0 || i >= n_vars_) throw std::invalid_argument("derivative: index out of range");
  Polynomial r(n_vars_);
  for (const auto& [m, c] : terms_) {
    const int e = m.exponents[static_cast<size_t>(i)];
    if (e == 0) continue;
    Monomial d = m;
    d.exponents[static_cast<size_t>(i)] = e - 1;
    r.add_term(d, c * e);
  }
  return r;
}

std::vector<Polynomial> Polynomial::hessian() const {
  std::vector<Polynomial> h;
  h.reserve(static_cast<size_t>(n_vars_) * static_cast<size_t>(n_vars_));
  std::vector<Polynomial> firsts;
  firsts.reserve(static_cast<size_t>(n_vars_));
  for (int i = 0; i < n_vars_; ++i) firsts.push_back(derivative(i));
  for (int i = 0; i < n_vars_; ++i) {
    for (int j = 0; j < n_vars_; ++j) {
      h.push_back(firsts[static_cast<size_t>(i)].derivative(j));
    }
  }
  return h;
}

Polynomial Polynomial::hessian_form() const {
  const int n = n_vars_;
  const auto h = hessian();
  Polynomial r(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Polynomial& hij = h[static_cast<size_t>(i * n + j)];
      for (const auto& [m, c] : hij.terms()) {
        std::vector<int> e(static_cast<size_t>(2 * n), 0);
        std::copy(m.exponents.begin(), m.exponents.end(), e.begin());
        e[static_cast<size_t>(n + i)] += 1;
        e[static_cast<size_t>(n + j)] += 1;
        r.add_term(Monomial(std::move(e)), c);
      }
    }
  }
  return r;
}

Polynomial Polynomial::substitute_affine(const Eigen::MatrixXd& A,
                                         const Eigen::VectorXd& b) const {
  if (A.rows() != n_vars_ || A.cols() != n_vars_ || b.size() != n_vars_)
    throw std::invalid_argument("substitute_affine: shape mismatch");
  // Images of the variables.
  std::vector<Polynomial> img;
  img.reserve(static_cast<size_t>(n_vars_));
  for (int i = 0; i < n_vars_; ++i) {
    Polynomial li(n_vars_);
    li.add_term(Monomial::unit(n_vars_), b[i]);
    for (int j = 0; j < n_vars_; ++j) {
      if (A(i, j) != 0.0) li.add_term(Monomial::var(n_vars_, j), A(i, j));
    }
    img.push_back(std::move(li));
  }
  Polynomial r(n_vars_);
  for (const auto& [m, c] : terms_) {
    Polynomial t = Polynomial::constant(n_vars_, c);
    for (int i = 0; i < n_vars_; ++i) {
      for (int k = 0; k < m.exponents[static_cast<size_t>(i)]; ++k) {
        t = t * img[static_cast<size_t>(i)];
      }
    }
    r += t;
  }
  return r;
}

Polynomial Polynomial::embed(int new_n_vars, int offset) const {
  if (offset < 0 || offset + n_vars_ > new_n_vars)
    throw std::invalid_argument("embed: variables do not fit");
  Polynomial r(new_n_vars);
  for (const auto& [m, c] : terms_) {
    std::vector<int> e(static_cast<size_t>(new_n_vars), 0);
    std::copy(m.exponents.begin(), m.exponents.end(), e.begin() + offset);
    r.add_term(Monomial(std::move(e)), c);
  }
  return r;
}

Eigen::VectorXd Polynomial::gradient_at(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(n_vars_);
  for (int i = 0; i < n_vars_; ++i) g[i] = derivative(i).eval(x);
  return g;
}

Eigen::MatrixXd Polynomial::hessian_at(const Eigen::VectorXd& x) const {
  const auto h = hessian();
  Eigen::MatrixXd H(n_vars_, n_vars_);
  for (int i = 0; i < n_vars_; ++i)
    for (int j = 0; j < n_vars_; ++j) H(i, j) = h[static_cast<size_t>(i * n_vars_ + j)].eval(x);
  return H;
}

Polynomial Polynomial::trimmed(double eps) const {
  Polynomial r(n_vars_);
  for (const auto& [m, c] : terms_) {
    if (std::abs(c) > eps) r.terms_.emplace(m, c);
  }
  return r;
}

bool Polynomial::almost_equal(const Polynomial& other, double eps) const {
  if (other.n_vars_ != n_vars_) return false;
  Polynomial d = *this - other;
  return d.max_abs_coeff() <= eps;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << (c >= 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c);
    if (!m.is_constant()) os << "*" << m.str();
  }
  return os.str();
}

}  // namespace sosgeom
