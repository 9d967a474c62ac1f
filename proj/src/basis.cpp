#include "switchtrack/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace switchtrack {

namespace {

int tuple_degree(const std::vector<int>& e) {
  return std::accumulate(e.begin(), e.end(), 0);
}

// Graded lexicographic: lower total degree first, then lexicographically
// larger exponent tuple first (x1^2 before x1 x2 before x2^2).
bool grlex_less(const std::vector<int>& a, const std::vector<int>& b) {
  int da = tuple_degree(a), db = tuple_degree(b);
  if (da != db) return da < db;
  return a > b;
}

void enumerate_rec(int var, int remaining, std::vector<int>& current,
                   std::vector<std::vector<int>>& out) {
  if (var == static_cast<int>(current.size())) {
    out.push_back(current);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current[static_cast<size_t>(var)] = e;
    enumerate_rec(var + 1, remaining - e, current, out);
  }
  current[static_cast<size_t>(var)] = 0;
}

}  // namespace

PolynomialBasis PolynomialBasis::enumerate(int nvars, int degree) {
  if (nvars < 1) throw ValidationError("basis needs at least one variable");
  if (degree < 0) throw ValidationError("basis degree must be nonnegative");
  PolynomialBasis b;
  b.nvars = nvars;
  b.degree = degree;
  std::vector<int> current(static_cast<size_t>(nvars), 0);
  enumerate_rec(0, degree, current, b.monomials);
  std::sort(b.monomials.begin(), b.monomials.end(), grlex_less);
  return b;
}

Vec PolynomialBasis::eval(const Vec& vars) const {
  if (vars.size() != nvars)
    throw ValidationError("basis evaluated with wrong variable count");
  // Power table per variable avoids recomputing pow() per monomial.
  Mat powers(nvars, degree + 1);
  powers.col(0).setOnes();
  for (int d = 1; d <= degree; ++d)
    powers.col(d) = powers.col(d - 1).cwiseProduct(vars);
  Vec out(size());
  for (int i = 0; i < size(); ++i) {
    double v = 1.0;
    const auto& e = monomials[static_cast<size_t>(i)];
    for (int j = 0; j < nvars; ++j)
      if (e[static_cast<size_t>(j)] > 0) v *= powers(j, e[static_cast<size_t>(j)]);
    out(i) = v;
  }
  return out;
}

Vec PolynomialBasis::eval(const Vec& tsw, const Vec& x) const {
  Vec vars(tsw.size() + x.size());
  vars << tsw, x;
  return eval(vars);
}

int PolynomialBasis::index_of(const std::vector<int>& expo) const {
  auto it = std::lower_bound(monomials.begin(), monomials.end(), expo, grlex_less);
  if (it != monomials.end() && *it == expo)
    return static_cast<int>(it - monomials.begin());
  return -1;
}

void PolynomialExpression::add_term(double coeff, std::vector<int> expo) {
  if (static_cast<int>(expo.size()) != nvars)
    throw ValidationError("term exponent count does not match polynomial variables");
  terms.push_back({coeff, std::move(expo)});
}

void PolynomialExpression::canonicalize(double drop_tol) {
  std::sort(terms.begin(), terms.end(),
            [](const PolyTerm& a, const PolyTerm& b) { return grlex_less(a.expo, b.expo); });
  std::vector<PolyTerm> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().expo == t.expo)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  terms.clear();
  for (auto& t : merged)
    if (std::abs(t.coeff) > drop_tol) terms.push_back(std::move(t));
}

double PolynomialExpression::eval(const Vec& vars) const {
  if (vars.size() != nvars)
    throw ValidationError("polynomial evaluated with wrong variable count");
  double out = 0.0;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (int j = 0; j < nvars; ++j)
      for (int e = 0; e < t.expo[static_cast<size_t>(j)]; ++e) v *= vars(j);
    out += v;
  }
  return out;
}

PolynomialExpression PolynomialExpression::differentiate(int var) const {
  PolynomialExpression d(nvars);
  for (const auto& t : terms) {
    int e = t.expo[static_cast<size_t>(var)];
    if (e == 0) continue;
    auto expo = t.expo;
    expo[static_cast<size_t>(var)] = e - 1;
    d.add_term(t.coeff * static_cast<double>(e), std::move(expo));
  }
  d.canonicalize();
  return d;
}

PolynomialExpression PolynomialExpression::substitute_state(int keep, const Vec& x) const {
  if (keep + x.size() != nvars)
    throw ValidationError("substitute_state: kept variables plus state values must cover all variables");
  PolynomialExpression out(keep);
  for (const auto& t : terms) {
    double c = t.coeff;
    for (int j = keep; j < nvars; ++j)
      for (int e = 0; e < t.expo[static_cast<size_t>(j)]; ++e) c *= x(j - keep);
    out.add_term(c, std::vector<int>(t.expo.begin(), t.expo.begin() + keep));
  }
  out.canonicalize();
  return out;
}

int PolynomialExpression::total_degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, tuple_degree(t.expo));
  return d;
}

double PolynomialExpression::coefficient(const std::vector<int>& expo) const {
  for (const auto& t : terms)
    if (t.expo == expo) return t.coeff;
  return 0.0;
}

double PolynomialExpression::coeff_distance(const PolynomialExpression& other) const {
  double d = 0.0;
  for (const auto& t : terms)
    d = std::max(d, std::abs(t.coeff - other.coefficient(t.expo)));
  for (const auto& t : other.terms)
    d = std::max(d, std::abs(t.coeff - coefficient(t.expo)));
  return d;
}

double PolynomialExpression::coeff_norm() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.coeff * t.coeff;
  return std::sqrt(s);
}

std::string PolynomialExpression::to_string(const std::vector<std::string>& names) const {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms) {
    if (!first) os << " + ";
    first = false;
    os << format_full(t.coeff);
    for (int j = 0; j < nvars; ++j) {
      int e = t.expo[static_cast<size_t>(j)];
      if (e == 0) continue;
      os << "*";
      if (static_cast<size_t>(j) < names.size())
        os << names[static_cast<size_t>(j)];
      else
        os << "v" << j;
      if (e > 1) os << "^" << e;
    }
  }
  if (first) os << "0";
  return os.str();
}

PolynomialExpression integrate_costate_field(const PolynomialBasis& basis, const Mat& W,
                                             int num_switch_vars,
                                             const std::vector<int>* order) {
  const int n = basis.nvars - num_switch_vars;
  if (n < 1) throw ValidationError("costate field needs at least one state variable");
  if (W.rows() != basis.size() || W.cols() != n)
    throw ValidationError("weight matrix must be (basis size) x (state dim)");

  std::vector<int> path(static_cast<size_t>(n));
  std::iota(path.begin(), path.end(), 0);
  if (order) {
    if (order->size() != static_cast<size_t>(n))
      throw ValidationError("integration order must permute the state variables");
    path = *order;
  }
  // position of each state axis along the path
  std::vector<int> rank(static_cast<size_t>(n), 0);
  for (int s = 0; s < n; ++s) rank[static_cast<size_t>(path[static_cast<size_t>(s)])] = s;

  PolynomialExpression V(basis.nvars);
  // Leg s of the polyline varies state axis path[s]; axes visited earlier
  // stay symbolic, later ones sit at zero.
  for (int s = 0; s < n; ++s) {
    int axis = path[static_cast<size_t>(s)];
    for (int b = 0; b < basis.size(); ++b) {
      double w = W(b, axis);
      if (w == 0.0) continue;
      const auto& e = basis.monomials[static_cast<size_t>(b)];
      bool survives = true;
      for (int j = 0; j < n; ++j) {
        if (rank[static_cast<size_t>(j)] > s && e[static_cast<size_t>(num_switch_vars + j)] > 0) {
          survives = false;  // later axis held at zero kills the monomial
          break;
        }
      }
      if (!survives) continue;
      auto expo = e;
      int& ax = expo[static_cast<size_t>(num_switch_vars + axis)];
      ax += 1;
      V.add_term(w / static_cast<double>(ax), std::move(expo));
    }
  }
  V.canonicalize();
  return V;
}

std::vector<double> real_roots(const std::vector<double>& coeffs) {
  // strip leading (highest-order) zeros
  int d = static_cast<int>(coeffs.size()) - 1;
  while (d > 0 && coeffs[static_cast<size_t>(d)] == 0.0) --d;
  std::vector<double> roots;
  if (d <= 0) return roots;
  const double a = coeffs[static_cast<size_t>(d)];
  if (d == 1) {
    roots.push_back(-coeffs[0] / a);
    return roots;
  }
  if (d == 2) {
    double b = coeffs[1], c = coeffs[0];
    double disc = b * b - 4.0 * a * c;
    if (disc < 0) return roots;
    double sq = std::sqrt(disc);
    // Citardauq pairing avoids cancellation for the small root.
    double q = -0.5 * (b + (b >= 0 ? sq : -sq));
    roots.push_back(q / a);
    if (q != 0.0)
      roots.push_back(c / q);
    else
      roots.push_back(0.0);
    return roots;
  }
  if (d == 3) {
    // depressed cubic t^3 + pt + q with x = t - b/(3a)
    double b = coeffs[2] / a, c = coeffs[1] / a, dd = coeffs[0] / a;
    double p = c - b * b / 3.0;
    double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + dd;
    double shift = -b / 3.0;
    double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0) {
      double sq = std::sqrt(disc);
      double u = std::cbrt(-q / 2.0 + sq);
      double v = std::cbrt(-q / 2.0 - sq);
      roots.push_back(u + v + shift);
    } else if (p == 0.0 && q == 0.0) {
      roots.push_back(shift);
    } else {
      // three real roots (trigonometric form)
      double r = std::sqrt(-p * p * p / 27.0);
      double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
      double m = 2.0 * std::sqrt(-p / 3.0);
      for (int k = 0; k < 3; ++k)
        roots.push_back(m * std::cos((phi + 2.0 * M_PI * k) / 3.0) + shift);
    }
    return roots;
  }
  // companion matrix for the monic polynomial
  Mat C = Mat::Zero(d, d);
  for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) C(i, d - 1) = -coeffs[static_cast<size_t>(i)] / a;
  Eigen::EigenSolver<Mat> es(C);
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
  for (int i = 0; i < d; ++i) {
    std::complex<double> z = es.eigenvalues()(i);
    if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z.real())))
      roots.push_back(z.real());
  }
  return roots;
}

double minimize_univariate_poly(const PolynomialExpression& p, double lo, double hi) {
  if (p.nvars != 1) throw ValidationError("minimize_univariate_poly needs a univariate polynomial");
  if (!(lo < hi)) throw ValidationError("empty interval");
  if (p.total_degree() > 6)
    throw ValidationError("univariate minimization supports degree <= 6");

  int deg = p.total_degree();
  std::vector<double> c(static_cast<size_t>(deg) + 1, 0.0);
  for (const auto& t : p.terms) c[static_cast<size_t>(t.expo[0])] = t.coeff;
  std::vector<double> dc(static_cast<size_t>(std::max(deg, 1)), 0.0);
  for (int i = 1; i <= deg; ++i)
    dc[static_cast<size_t>(i - 1)] = c[static_cast<size_t>(i)] * static_cast<double>(i);

  std::vector<double> candidates = {lo, hi};
  for (double r : real_roots(dc))
    if (r > lo && r < hi) candidates.push_back(r);
  std::sort(candidates.begin(), candidates.end());

  auto value = [&](double x) {
    double v = 0.0;
    for (int i = deg; i >= 0; --i) v = v * x + c[static_cast<size_t>(i)];
    return v;
  };
  double best_x = candidates.front();
  double best_v = value(best_x);
  for (double x : candidates) {
    double v = value(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace switchtrack
