#include "b295/twint.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace b295::twint {

void TwinTParams::validate() const {
  for (double v : {r1, r2, r3, c1, c2, c3})
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("Twin-T component values must be positive and finite");
}

RationalFunction coefficients(const TwinTParams& p) {
  p.validate();
  const double b2 = p.r2 * p.r3 * p.c1 * p.c2 + p.r1 * p.r3 * p.c1 * (p.c2 + p.c3);
  const double b1 = (p.r2 + p.r3) * p.c2 + p.r3 * p.c1;
  const double a3 = p.r1 * p.r2 * p.r3 * p.c1 * p.c2 * p.c3;
  const double a2 = p.r1 * (p.r2 + p.r3) * p.c2 * p.c3;
  const double a1 = p.r1 * (p.c2 + p.c3);
  return RationalFunction{Polynomial{0.0, b1, b2}, Polynomial{1.0, a1, a2, a3}, -1};
}

CanonicalBandpass canonical_special_case(const TwinTParams& p) {
  p.validate();
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(x, y); };
  if (!close(p.r1, p.r3) || !close(p.c1, p.c3))
    throw SpecialCaseError("canonical form needs R1 = R3 and C1 = C3");
  CanonicalBandpass out;
  out.omega_n = 1.0 / std::sqrt(p.r1 * p.r2 * p.c1 * p.c2);
  out.q = std::sqrt(p.r2 * p.c1 / (p.r1 * p.c2));
  out.gain_a = p.r2 / p.r1 + 1.0 + p.c1 / p.c2;
  return out;
}

double initial_r2(double f_c, double r1, double c1, double c2) {
  if (!(f_c > 0.0 && r1 > 0.0 && c1 > 0.0 && c2 > 0.0))
    throw std::invalid_argument("initial_r2 arguments must be positive");
  const double w = 2.0 * std::numbers::pi * f_c;
  return 1.0 / (w * w * r1 * c1 * c2);
}

PeakPoint find_peak(const RationalFunction& h, double f_lo, double f_hi) {
  if (!(f_lo > 0.0 && f_hi > f_lo)) throw std::invalid_argument("find_peak needs 0 < f_lo < f_hi");
  constexpr int kScan = 512;
  const double log_lo = std::log(f_lo);
  const double step = (std::log(f_hi) - log_lo) / (kScan - 1);
  auto mag = [&](double log_f) { return std::abs(evaluate(h, 2.0 * std::numbers::pi * std::exp(log_f))); };

  int best = 0;
  double best_mag = -1.0;
  for (int i = 0; i < kScan; ++i) {
    double m = mag(log_lo + step * i);
    if (m > best_mag) best_mag = m, best = i;
  }
  if (best == 0 || best == kScan - 1)
    throw BoundaryPeakError(fmt::format("|H| peaks at the edge of [{}, {}] Hz", f_lo, f_hi));

  // Golden-section maximization over the two neighbouring scan cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = log_lo + step * (best - 1);
  double b = log_lo + step * (best + 1);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double m1 = mag(x1), m2 = mag(x2);
  // Relative frequency tolerance 1e-6 is an absolute tolerance in log f.
  while (b - a > 1e-6) {
    if (m1 < m2) {
      a = x1;
      x1 = x2, m1 = m2;
      x2 = a + inv_phi * (b - a);
      m2 = mag(x2);
    } else {
      b = x2;
      x2 = x1, m2 = m1;
      x1 = b - inv_phi * (b - a);
      m1 = mag(x1);
    }
  }
  PeakPoint out;
  out.f_peak = std::exp(0.5 * (a + b));
  out.gain_linear = mag(0.5 * (a + b));
  out.gain_db = 20.0 * std::log10(out.gain_linear);
  return out;
}

mna::Netlist netlist(const TwinTParams& p) {
  p.validate();
  mna::Netlist n;
  n.elements = {
      mna::Capacitor{"C1", "in", "A", p.c1}, mna::Resistor{"R2", "A", "vg", p.r2},
      mna::Resistor{"R1", "in", "B", p.r1},  mna::Capacitor{"C2", "B", "vg", p.c2},
      mna::Resistor{"R3", "A", "out", p.r3}, mna::Capacitor{"C3", "B", "out", p.c3},
      mna::IdealOpamp{"O1", "0", "vg", "out"},
  };
  n.nodes = {"in", "A", "vg", "B", "out"};
  n.input_node = "in";
  n.output_node = "out";
  n.validate();
  return n;
}

}  // namespace b295::twint
