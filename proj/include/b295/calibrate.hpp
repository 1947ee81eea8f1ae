#pragma once

// Per-channel trimmer calibration of the eight Twin-T bandpass bands.

#include "b295/ratfunc.hpp"
#include "b295/twint.hpp"

#include <optional>
#include <string>
#include <vector>

namespace b295::calibrate {

/// R1 is 15 kOhm in every band.
inline constexpr double kR1 = 15e3;
inline constexpr double kR3Min = 100.0;
inline constexpr double kR3Start = 15e3;
inline constexpr double kInputGain = 39.0 / 33.0;
inline constexpr double kMixerFeedback = 56e3;

/// Tap of the 3.3k / 150 / 330 input ladder feeding a band.
enum class Attenuation {
  Low330,   // 330 / 3780
  High480,  // (150 + 330) / 3780
};

[[nodiscard]] double attenuation_factor(Attenuation a);

struct ChannelSpec {
  double band_hz = 0.0;
  double c1_c3 = 0.0;  // C1 = C3
  double c2 = 0.0;
  double r2_fixed = 0.0;
  double r2_pot_max = 100e3;
  double r3_pot_max = 20e3;
  Attenuation attenuation = Attenuation::High480;
  double mixer_r = 33e3;
  bool inverted = false;
  /// How far the R2 search may run past the trimmer's end stop. Zero for a
  /// physical trimmer; the top band needs a little to reach its published value.
  double r2_overtravel = 0.0;

  [[nodiscard]] double r2_min() const { return r2_fixed; }
  [[nodiscard]] double r2_max() const { return r2_fixed + r2_pot_max + r2_overtravel; }
  void validate() const;
};

struct CalibrationResult {
  double r2 = 0.0;
  double r3 = 0.0;
  double q = 0.0;
  double f_peak = 0.0;
  double gain_db = 0.0;
  int iterations = 0;
  /// R2 landed beyond r2_fixed + r2_pot_max (inside the overtravel allowance).
  bool r2_beyond_pot = false;
};

struct CalibrationOptions {
  double target_gain_db = 6.5;
  double tol_freq_hz = 0.05;
  double tol_gain_db = 0.001;
  int max_iterations = 100;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The eight bands, frequency ordered, with default inversion flags.
[[nodiscard]] std::vector<ChannelSpec> default_specs();

/// A row of the published part-value table, for reproducing its R2' column.
struct TableIRow {
  double band_hz;
  double design_hz;  // frequency the printed R2' corresponds to
  double c1_c3;
  double c2;
  double r2_fixed;
  double printed_r2_prime;
};

[[nodiscard]] std::vector<TableIRow> table1_rows();

/// A published calibration row: band, R2, R3, Q.
struct TableIIRow {
  double band_hz;
  double r2;
  double r3;
  double q;
};

[[nodiscard]] std::vector<TableIIRow> table2_rows();

/// Input stage x ladder x mixer gain; the slider at full volume is unity.
[[nodiscard]] double chain_gain_constant(const ChannelSpec& spec);

/// Twin-T response of the band scaled by the chain gain, negated when the
/// band is inverted. Throws RangeError when r2 or r3 fall outside the trimmers.
[[nodiscard]] RationalFunction channel_response(const ChannelSpec& spec, double r2, double r3);

/// Peak of channel_response in a decade either side of the band.
[[nodiscard]] twint::PeakPoint channel_peak(const ChannelSpec& spec, double r2, double r3);

struct Seed {
  double r2;
  double r3;
};

/// Alternates a bisection on R3 (peak gain) with a bisection on R2 (peak
/// frequency) until both residuals are inside the tolerances.
/// Throws NoBracketError or ConvergenceError.
[[nodiscard]] CalibrationResult calibrate_channel(const ChannelSpec& spec,
                                                  const CalibrationOptions& opts = {},
                                                  std::optional<Seed> seed = std::nullopt);

struct ChannelOutcome {
  ChannelSpec spec;
  std::optional<CalibrationResult> result;
  std::string error;  // set when result is empty
};

/// Calibrates every spec; channels run concurrently and a failing channel
/// does not stop the others. Output order follows the input.
[[nodiscard]] std::vector<ChannelOutcome> calibrate_all(const std::vector<ChannelSpec>& specs,
                                                        const CalibrationOptions& opts = {});

}  // namespace b295::calibrate
