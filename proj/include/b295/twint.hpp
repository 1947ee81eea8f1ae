#pragma once

// Closed-form model of the inverting bandpass Twin-T.
//
//   in --C1-- A --R2-- vg        vg is the opamp's inverting input (virtual
//   in --R1-- B --C2-- vg        ground); A and B tie back to the opamp
//             A --R3-- out       output through R3 and C3.
//             B --C3-- out
//
//   H(s) = -(b2 s^2 + b1 s) / (a3 s^3 + a2 s^2 + a1 s + 1)

#include "b295/mna.hpp"
#include "b295/ratfunc.hpp"

namespace b295::twint {

struct TwinTParams {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;  // ohms
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;  // farads

  /// Throws std::invalid_argument unless all six values are positive.
  void validate() const;
};

/// Second-order form left after the R1 = R3, C1 = C3 pole-zero cancellation.
struct CanonicalBandpass {
  double gain_a = 0.0;   // |H| at the peak
  double omega_n = 0.0;  // rad/s
  double q = 0.0;
};

struct PeakPoint {
  double f_peak = 0.0;  // Hz
  double gain_db = 0.0;
  double gain_linear = 0.0;
};

class SpecialCaseError : public Error {
 public:
  using Error::Error;
};

/// The peak of a search landed on the window edge.
class BoundaryPeakError : public Error {
 public:
  using Error::Error;
};

[[nodiscard]] RationalFunction coefficients(const TwinTParams& p);

/// Requires r1 == r3 and c1 == c3 to 1e-9 relative; throws SpecialCaseError.
[[nodiscard]] CanonicalBandpass canonical_special_case(const TwinTParams& p);

/// R2 that puts the special-case natural frequency at f_c:
/// 1 / ((2 pi f_c)^2 r1 c1 c2).
[[nodiscard]] double initial_r2(double f_c, double r1, double c1, double c2);

/// argmax |H(j 2 pi f)| on [f_lo, f_hi]: 512-point log scan, then golden
/// section in log frequency to 1e-6 relative.
[[nodiscard]] PeakPoint find_peak(const RationalFunction& h, double f_lo, double f_hi);

/// The circuit above as a netlist (nodes in, A, B, vg, out).
[[nodiscard]] mna::Netlist netlist(const TwinTParams& p);

}  // namespace b295::twint
