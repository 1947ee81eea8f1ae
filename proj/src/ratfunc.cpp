#include "b295/ratfunc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace b295 {

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(); }

Polynomial::Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { trim(); }

void Polynomial::trim() {
  for (double& v : coeffs_)
    if (v == 0.0) v = 0.0;  // drop negative zeros
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

Complex Polynomial::operator()(Complex s) const {
  Complex acc{0.0, 0.0};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::scaled(double k) const {
  std::vector<double> c(coeffs_);
  for (double& v : c) v *= k;
  return Polynomial(std::move(c));
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() < 2) return {};
  std::vector<double> c(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) c[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] + b[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] - b[k];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

namespace {

double reconstruction_error(std::span<const double> a, const std::vector<double>& q, double root) {
  const std::size_t n = a.size() - 1;
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    double rec = (k < n ? -root * q[k] : 0.0) + (k > 0 ? q[k - 1] : 0.0);
    double ref = a[k] != 0.0 ? std::abs(a[k]) : scale;
    worst = std::max(worst, std::abs(rec - a[k]) / ref);
  }
  return worst;
}

}  // namespace

Polynomial deflate(const Polynomial& p, double root) {
  if (p.degree() < 1) return {};
  const auto a = p.coeffs();
  const std::size_t n = a.size() - 1;

  std::vector<double> fwd(n);
  fwd[n - 1] = a[n];
  for (std::size_t k = n - 1; k > 0; --k) fwd[k - 1] = a[k] + root * fwd[k];
  if (root == 0.0) return Polynomial(std::move(fwd));

  std::vector<double> bwd(n);
  bwd[0] = -a[0] / root;
  for (std::size_t k = 1; k < n; ++k) bwd[k] = (bwd[k - 1] - a[k]) / root;

  // Splice point m: backward coefficients below m, forward from m up.
  std::vector<double> best = fwd;
  double best_err = reconstruction_error(a, fwd, root);
  for (std::size_t m = 1; m <= n; ++m) {
    std::vector<double> q(n);
    for (std::size_t k = 0; k < n; ++k) q[k] = k < m ? bwd[k] : fwd[k];
    double err = reconstruction_error(a, q, root);
    if (err < best_err) {
      best_err = err;
      best = std::move(q);
    }
  }
  return Polynomial(std::move(best));
}

std::vector<Complex> roots(const Polynomial& p) {
  std::vector<Complex> out;
  if (p.degree() < 1) return out;
  auto c = p.coeffs();
  std::size_t low = 0;
  while (c[low] == 0.0) ++low;
  out.assign(low, Complex{0.0, 0.0});
  const std::size_t n = c.size() - 1 - low;
  if (n == 0) return out;

  // Substitute s = rho * t so the companion matrix entries are O(1).
  const double rho = std::pow(std::abs(c[low] / c.back()), 1.0 / static_cast<double>(n));
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    double monic = c[low + k] / c.back() / std::pow(rho, static_cast<double>(n - k));
    companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n - 1)) = -monic;
    if (k > 0) companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto& ev = solver.eigenvalues();

  const Polynomial dp = p.derivative();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    Complex z = ev[i] * rho;
    // Two Newton steps against the original coefficients.
    for (int step = 0; step < 2; ++step) {
      Complex d = dp(z);
      if (std::abs(d) == 0.0) break;
      Complex next = z - p(z) / d;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      if (std::abs(p(next)) > std::abs(p(z))) break;
      z = next;
    }
    out.push_back(z);
  }
  std::sort(out.begin(), out.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

Complex RationalFunction::at(Complex s) const {
  return static_cast<double>(sign) * num(s) / den(s);
}

RationalFunction normalize(Polynomial num, Polynomial den, int sign) {
  if (den.is_zero()) throw std::invalid_argument("rational function with zero denominator");
  sign = sign < 0 ? -1 : 1;
  if (!num.is_zero()) {
    auto nc = num.coeffs();
    auto dc = den.coeffs();
    std::size_t shift = 0;
    while (nc[shift] == 0.0 && dc[shift] == 0.0) ++shift;
    if (shift > 0) {
      num = Polynomial(std::vector<double>(nc.begin() + static_cast<std::ptrdiff_t>(shift), nc.end()));
      den = Polynomial(std::vector<double>(dc.begin() + static_cast<std::ptrdiff_t>(shift), dc.end()));
    }
  }
  const double scale = den[0] != 0.0 ? den[0] : den.leading();
  auto divided = [scale](const Polynomial& p) {
    std::vector<double> c(p.coeffs().begin(), p.coeffs().end());
    for (double& v : c) v /= scale;
    return Polynomial(std::move(c));
  };
  num = divided(num);
  den = divided(den);
  if (num.leading() < 0.0) {
    num = num.scaled(-1.0);
    sign = -sign;
  }
  if (num.is_zero()) sign = 1;
  return RationalFunction{std::move(num), std::move(den), sign};
}

RationalFunction scaled(const RationalFunction& h, double k) {
  return normalize(h.num.scaled(k), h.den, h.sign);
}

Complex evaluate(const RationalFunction& h, double omega) {
  const Complex s{0.0, omega};
  const Complex d = h.den(s);
  if (std::abs(d) < std::numeric_limits<double>::min())
    throw PoleOnAxisError("denominator vanishes on the j-axis at omega = " + std::to_string(omega));
  return static_cast<double>(h.sign) * h.num(s) / d;
}

CubicSplit split_real_root(const Polynomial& cubic) {
  if (cubic.degree() != 3) throw std::invalid_argument("split_real_root needs a cubic");
  for (double c : cubic.coeffs())
    if (!(c > 0.0)) throw std::invalid_argument("split_real_root needs all-positive coefficients");

  const auto a = cubic.coeffs();
  double cauchy = 0.0;
  for (std::size_t k = 0; k < 3; ++k) cauchy = std::max(cauchy, std::abs(a[k] / a[3]));
  double lo = -(1.0 + cauchy);
  double hi = 0.0;
  if (!(cubic(lo) < 0.0 && cubic(hi) > 0.0))
    throw NoBracketError("no sign change on the cubic's root interval");

  for (int it = 0; it < 400 && (hi - lo) > 1e-12 * std::max(std::abs(lo), std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    (cubic(mid) < 0.0 ? lo : hi) = mid;
  }
  double root = 0.5 * (lo + hi);
  const double slope = cubic.derivative()(root);
  if (slope != 0.0) {
    double polished = root - cubic(root) / slope;
    if (std::isfinite(polished) && polished < 0.0 &&
        std::abs(cubic(polished)) <= std::abs(cubic(root)))
      root = polished;
  }
  return {root, deflate(cubic, root)};
}

BandpassFactors to_bandpass_factors(const RationalFunction& h) {
  const auto [root, quad] = split_real_root(h.den);
  const double linear = quad[1] / quad[2];
  const double constant = quad[0] / quad[2];
  if (linear * linear >= 4.0 * constant)
    throw RealQuadraticError("quadratic factor has real roots; Q is undefined");
  BandpassFactors f;
  f.a = -root;
  f.omega_n = std::sqrt(constant);
  f.q = f.omega_n / linear;
  f.gain_scale = static_cast<double>(h.sign) * h.num.leading() / h.den.leading();
  return f;
}

namespace {

std::vector<double> real_roots(const Polynomial& p) {
  std::vector<double> out;
  for (Complex z : roots(p))
    if (std::abs(z.imag()) <= 1e-9 * std::abs(z)) out.push_back(z.real());
  return out;
}

double polish(const Polynomial& p, double x) {
  const Polynomial dp = p.derivative();
  for (int step = 0; step < 3; ++step) {
    double d = dp(x);
    if (d == 0.0) break;
    double next = x - p(x) / d;
    if (!std::isfinite(next) || std::abs(p(next)) >= std::abs(p(x))) break;
    x = next;
  }
  return x;
}

}  // namespace

RationalFunction cancel_pole_zero(const RationalFunction& h, double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("cancel_pole_zero needs rel_tol > 0");
  RationalFunction out = h;
  for (bool changed = true; changed;) {
    changed = false;
    if (out.num.degree() < 1 || out.den.degree() < 1) break;
    for (double z : real_roots(out.num)) {
      for (double p : real_roots(out.den)) {
        if (std::abs(z - p) > rel_tol * std::max(std::abs(z), std::abs(p))) continue;
        out = normalize(deflate(out.num, polish(out.num, z)), deflate(out.den, polish(out.den, p)),
                        out.sign);
        changed = true;
        break;
      }
      if (changed) break;
    }
  }
  return out;
}

}  // namespace b295
