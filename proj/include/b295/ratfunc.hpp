#pragma once

// Real-coefficient polynomials and rational functions in the Laplace variable s.

#include <complex>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace b295 {

using Complex = std::complex<double>;

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |den(jw)| underflowed: the frequency sits on a pole.
class PoleOnAxisError : public Error {
 public:
  using Error::Error;
};

/// No sign change on the cubic's search interval.
class NoBracketError : public Error {
 public:
  using Error::Error;
};

/// The deflated quadratic has real roots, so Q is undefined.
class RealQuadraticError : public Error {
 public:
  using Error::Error;
};

/// Polynomial with coefficients stored in ascending powers of s.
///
/// Trailing (highest-power) zeros are stripped on construction, so the stored
/// leading coefficient is nonzero unless the polynomial is identically zero.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> ascending);
  Polynomial(std::initializer_list<double> ascending);

  /// -1 for the zero polynomial.
  [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] std::span<const double> coeffs() const { return coeffs_; }

  /// Coefficient of s^k; zero beyond the degree.
  [[nodiscard]] double operator[](std::size_t k) const {
    return k < coeffs_.size() ? coeffs_[k] : 0.0;
  }
  [[nodiscard]] double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

  /// Horner evaluation.
  [[nodiscard]] Complex operator()(Complex s) const;
  [[nodiscard]] double operator()(double x) const;

  [[nodiscard]] Polynomial scaled(double k) const;
  [[nodiscard]] Polynomial derivative() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// Divides by (s - root) using whichever of forward, backward or spliced
/// synthetic division reconstructs p best. The remainder is discarded.
[[nodiscard]] Polynomial deflate(const Polynomial& p, double root);

/// All complex roots of p (companion-matrix eigenvalues).
[[nodiscard]] std::vector<Complex> roots(const Polynomial& p);

/// H(s) = sign * num(s) / den(s).
///
/// Produced by normalize(): the denominator constant term is 1 when nonzero
/// (monic otherwise), and the numerator's leading coefficient is positive with
/// any overall minus carried in `sign`.
struct RationalFunction {
  Polynomial num;
  Polynomial den{1.0};
  int sign = 1;

  /// sign * num(s) / den(s) at an arbitrary complex s.
  [[nodiscard]] Complex at(Complex s) const;
};

/// Brings (num, den) into the canonical normalization. Common powers of s are
/// divided out. Throws std::invalid_argument if den is identically zero.
[[nodiscard]] RationalFunction normalize(Polynomial num, Polynomial den, int sign = 1);

/// Multiplies the numerator gain by k (sign absorbed when k < 0).
[[nodiscard]] RationalFunction scaled(const RationalFunction& h, double k);

/// H(j*omega). Throws PoleOnAxisError if |den(j*omega)| underflows.
[[nodiscard]] Complex evaluate(const RationalFunction& h, double omega);

struct CubicSplit {
  double root;          ///< the real root (negative for positive coefficients)
  Polynomial quadratic; ///< p / (s - root), carrying p's leading coefficient
};

/// Extracts the real root of a cubic with all-positive coefficients by
/// bisection from the Cauchy bound followed by one Newton polish, then
/// deflates. Throws std::invalid_argument on a bad degree or nonpositive
/// coefficient, NoBracketError if the interval shows no sign change.
[[nodiscard]] CubicSplit split_real_root(const Polynomial& cubic);

/// den = (s + a)(s^2 + (omega_n/q) s + omega_n^2) up to gain_scale.
struct BandpassFactors {
  double a = 0.0;
  double omega_n = 0.0;
  double q = 0.0;
  /// sign * num.leading() / den.leading()
  double gain_scale = 0.0;
};

[[nodiscard]] BandpassFactors to_bandpass_factors(const RationalFunction& h);

/// Removes one matched real zero/pole pair whose values agree within rel_tol.
/// Repeats until no pair matches. Returns h unchanged when nothing cancels.
[[nodiscard]] RationalFunction cancel_pole_zero(const RationalFunction& h, double rel_tol);

}  // namespace b295
