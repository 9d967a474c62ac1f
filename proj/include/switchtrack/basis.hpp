#pragma once

#include <string>
#include <vector>

#include "switchtrack/common.hpp"

namespace switchtrack {

// All monomials in `nvars` variables up to a total degree, in graded
// lexicographic order (degree first, earlier variables ranked higher), so a
// degree-1 basis over (t1, x1, x2) evaluates to (1, t1, x1, x2).
struct PolynomialBasis {
  int nvars = 0;
  int degree = 0;
  std::vector<std::vector<int>> monomials;

  static PolynomialBasis enumerate(int nvars, int degree);

  int size() const { return static_cast<int>(monomials.size()); }
  // vars = (t_1..t_K, x_1..x_n) concatenated.
  Vec eval(const Vec& vars) const;
  Vec eval(const Vec& tsw, const Vec& x) const;
  // Index of an exponent tuple, -1 if absent.
  int index_of(const std::vector<int>& expo) const;
};

struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> expo;
};

// Sparse multivariate polynomial. Canonical form: terms sorted the same way
// as PolynomialBasis, duplicates merged, zero coefficients dropped.
struct PolynomialExpression {
  int nvars = 0;
  std::vector<PolyTerm> terms;

  explicit PolynomialExpression(int nvars = 0) : nvars(nvars) {}

  void add_term(double coeff, std::vector<int> expo);
  void canonicalize(double drop_tol = 0.0);
  double eval(const Vec& vars) const;
  PolynomialExpression differentiate(int var) const;
  // Fix the trailing state variables to x, leaving the first `keep` switch
  // variables free.
  PolynomialExpression substitute_state(int keep, const Vec& x) const;
  int total_degree() const;
  double coefficient(const std::vector<int>& expo) const;
  // Max |coefficient| difference against another polynomial.
  double coeff_distance(const PolynomialExpression& other) const;
  double coeff_norm() const;
  std::string to_string(const std::vector<std::string>& names = {}) const;
};

// Path integral of the costate field lambda(x) = W' phi(t, x) along the
// axis-aligned polyline 0 -> (x_order[0], 0, ..) -> .. -> x, treating the
// first `num_switch_vars` basis variables as symbolic constants. W has one
// column per state component. `order` permutes the state axes of the path
// (default: natural order); the result keeps the basis variable layout and
// has no x-free terms.
PolynomialExpression integrate_costate_field(const PolynomialBasis& basis, const Mat& W,
                                             int num_switch_vars,
                                             const std::vector<int>* order = nullptr);

// Global minimum of a univariate polynomial (degree <= 6) over [lo, hi] by
// exhaustive comparison of endpoints and real stationary points; derivative
// roots come from closed forms up to the cubic and from the companion matrix
// above that. Returns the argmin (ties -> smaller argument).
double minimize_univariate_poly(const PolynomialExpression& p, double lo, double hi);

// Real roots of c[0] + c[1] x + ... + c[d] x^d.
std::vector<double> real_roots(const std::vector<double>& coeffs);

}  // namespace switchtrack
