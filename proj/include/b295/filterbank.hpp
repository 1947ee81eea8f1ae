#pragma once

// The ten-channel bank: third-order Sallen-Key end channels around the eight
// calibrated Twin-T bands, summed by an inverting mixer.

#include "b295/calibrate.hpp"
#include "b295/mna.hpp"
#include "b295/ratfunc.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <variant>
#include <vector>

namespace b295::filterbank {

inline constexpr std::size_t kChannelCount = 10;

enum class SallenKeyKind { Lowpass, Highpass };

/// Single-opamp unity-gain third-order topology. Lowpass:
///
///   in --R1-- a --R2-- b --R3-- c,   C1: a-gnd,  C2: b-out,  C3: c-gnd
///
/// with a follower from c to out. The highpass swaps every R for a C.
struct SallenKeyComponents {
  std::array<double, 3> r{};
  std::array<double, 3> c{};
};

struct SallenKeyConfig {
  SallenKeyKind kind = SallenKeyKind::Lowpass;
  double cutoff_hz = 100.0;
  /// Without explicit parts the response is a Butterworth alignment at cutoff_hz.
  std::optional<SallenKeyComponents> components;

  void validate() const;
};

[[nodiscard]] mna::Netlist sallen_key_netlist(SallenKeyKind kind, const SallenKeyComponents& parts);
[[nodiscard]] RationalFunction sallen_key_tf(const SallenKeyConfig& cfg);

/// A Twin-T band with its trimmer settings.
struct BandChannel {
  calibrate::ChannelSpec spec;
  double r2 = 0.0;
  double r3 = 0.0;
};

using ChannelConfig = std::variant<SallenKeyConfig, BandChannel>;

struct BankConfig {
  std::vector<ChannelConfig> channels;
  std::set<std::size_t> inversion_pattern;
  std::vector<double> slider_gains = std::vector<double>(kChannelCount, 1.0);

  /// Ten channels in increasing frequency, sliders in [0, 1], inversion
  /// indices in range. Throws std::invalid_argument.
  void validate() const;
};

/// {200, 500, 1000, 2000 Hz, highpass}: strict alternation ending on the highpass.
[[nodiscard]] std::set<std::size_t> default_inversion_pattern();

/// Input stage and mixer gain seen by an end channel (no ladder).
[[nodiscard]] double end_channel_gain();

/// Butterworth end channels at 100 Hz / 7 kHz, bands at the given trimmer
/// settings, default inversions, sliders full.
[[nodiscard]] BankConfig make_bank(const std::vector<calibrate::ChannelSpec>& specs,
                                   const std::vector<calibrate::CalibrationResult>& results);

/// make_bank over the calibrated default bands. Throws if any band fails.
[[nodiscard]] BankConfig default_bank();

/// Nominal frequency used for ordering: cutoff or band centre.
[[nodiscard]] double nominal_hz(const ChannelConfig& ch);

/// Full response of one channel: chain gain, inversion sign and slider.
[[nodiscard]] RationalFunction channel_tf(const BankConfig& bank, std::size_t index);

struct SweepRow {
  double f = 0.0;
  double magnitude_db = 0.0;
  double phase_deg = 0.0;
  double re = 0.0;
  double im = 0.0;
};

using SweepResult = std::vector<SweepRow>;

[[nodiscard]] SweepRow make_row(double f, Complex h);

/// Evaluates h at each frequency (Hz). Frequencies must strictly increase.
[[nodiscard]] SweepResult sweep(const RationalFunction& h, const std::vector<double>& freqs);

[[nodiscard]] SweepResult channel_sweep(const BankConfig& bank, std::size_t index,
                                        const std::vector<double>& freqs);

/// Complex sum of every channel's response.
[[nodiscard]] SweepResult summed_sweep(const BankConfig& bank, const std::vector<double>& freqs);

/// Max minus min of magnitude_db over rows with f in [f_lo, f_hi].
/// Throws std::invalid_argument when fewer than two rows fall in the band.
[[nodiscard]] double ripple_db(const SweepResult& sweep, double f_lo, double f_hi);

[[nodiscard]] std::vector<double> log_space(double f_lo, double f_hi, std::size_t points);
[[nodiscard]] std::vector<double> lin_space(double f_lo, double f_hi, std::size_t points);

}  // namespace b295::filterbank
