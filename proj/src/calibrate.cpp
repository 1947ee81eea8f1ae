#include "b295/calibrate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <stdexcept>

namespace b295::calibrate {

double attenuation_factor(Attenuation a) {
  constexpr double ladder = 3300.0 + 150.0 + 330.0;
  return a == Attenuation::Low330 ? 330.0 / ladder : (150.0 + 330.0) / ladder;
}

void ChannelSpec::validate() const {
  if (!(band_hz > 0.0 && c1_c3 > 0.0 && c2 > 0.0 && r2_fixed > 0.0 && mixer_r > 0.0))
    throw std::invalid_argument("channel spec needs positive band, capacitors, fixed R2 and mixer R");
  if (!(r2_pot_max >= 0.0 && r3_pot_max > kR3Min && r2_overtravel >= 0.0))
    throw std::invalid_argument("channel spec trimmer ranges are invalid");
}

std::vector<ChannelSpec> default_specs() {
  using A = Attenuation;
  auto row = [](double band, double c1, double c2, double r2_fixed, A att, double mixer, bool inv) {
    ChannelSpec s;
    s.band_hz = band;
    s.c1_c3 = c1;
    s.c2 = c2;
    s.r2_fixed = r2_fixed;
    s.attenuation = att;
    s.mixer_r = mixer;
    s.inverted = inv;
    return s;
  };
  std::vector<ChannelSpec> specs = {
      row(200, 47e-9, 10e-9, 68e3, A::High480, 39e3, true),
      row(350, 22e-9, 4.7e-9, 91e3, A::Low330, 33e3, false),
      row(500, 22e-9, 2.2e-9, 91e3, A::Low330, 33e3, true),
      row(700, 10e-9, 1.5e-9, 150e3, A::Low330, 33e3, false),
      row(1000, 10e-9, 910e-12, 150e3, A::Low330, 33e3, true),
      row(1400, 4.7e-9, 910e-12, 150e3, A::Low330, 33e3, false),
      row(2000, 4.7e-9, 470e-12, 150e3, A::Low330, 39e3, true),
      row(3200, 2.2e-9, 470e-12, 68e3, A::High480, 33e3, false),
  };
  // The published top-band R2 (171.2k) sits past the 68k + 100k trimmer.
  specs.back().r2_overtravel = 10e3;
  return specs;
}

std::vector<TableIRow> table1_rows() {
  return {
      {200, 200, 47e-9, 10e-9, 68e3, 89.8e3},
      {350, 350, 22e-9, 4.7e-9, 91e3, 133e3},
      {500, 500, 22e-9, 2.2e-9, 91e3, 140e3},
      {700, 700, 10e-9, 1.5e-9, 150e3, 230e3},
      {1000, 1000, 10e-9, 910e-12, 150e3, 186e3},
      {1400, 1400, 4.7e-9, 910e-12, 150e3, 201e3},
      {2000, 2000, 4.7e-9, 470e-12, 150e3, 191e3},
      // The top band's R2' matches a 3.5 kHz design frequency.
      {3200, 3500, 2.2e-9, 470e-12, 68e3, 133e3},
  };
}

std::vector<TableIIRow> table2_rows() {
  return {
      {200, 93e3, 13.98e3, 4.522},     {350, 136.6e3, 14.04e3, 5.395},
      {500, 149.5e3, 13.15e3, 5.941},  {700, 242e3, 12.41e3, 5.422},
      {1000, 199.5e3, 12.75e3, 5.989}, {1400, 209.8e3, 12.74e3, 5.222},
      {2000, 200.5e3, 13.4e3, 6.946},  {3200, 171.2e3, 11.3e3, 3.721},
  };
}

double chain_gain_constant(const ChannelSpec& spec) {
  return kInputGain * attenuation_factor(spec.attenuation) * (kMixerFeedback / spec.mixer_r);
}

RationalFunction channel_response(const ChannelSpec& spec, double r2, double r3) {
  spec.validate();
  constexpr double slack = 1e-12;
  if (!(r2 >= spec.r2_min() * (1 - slack) && r2 <= spec.r2_max() * (1 + slack)))
    throw RangeError(fmt::format("R2 = {} outside [{}, {}]", r2, spec.r2_min(), spec.r2_max()));
  if (!(r3 > 0.0 && r3 <= spec.r3_pot_max * (1 + slack)))
    throw RangeError(fmt::format("R3 = {} outside (0, {}]", r3, spec.r3_pot_max));
  const twint::TwinTParams p{kR1, r2, r3, spec.c1_c3, spec.c2, spec.c1_c3};
  const double k = chain_gain_constant(spec) * (spec.inverted ? -1.0 : 1.0);
  return scaled(twint::coefficients(p), k);
}

twint::PeakPoint channel_peak(const ChannelSpec& spec, double r2, double r3) {
  return twint::find_peak(channel_response(spec, r2, r3), spec.band_hz / 10.0, spec.band_hz * 10.0);
}

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi, const char* what) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0))
    throw NoBracketError(fmt::format("{} target not reachable on [{:.6g}, {:.6g}] (residuals {:.4g}, {:.4g})",
                                     what, lo, hi, f_lo, f_hi));
  for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CalibrationResult calibrate_channel(const ChannelSpec& spec, const CalibrationOptions& opts,
                                    std::optional<Seed> seed) {
  spec.validate();
  double r2 = std::clamp(twint::initial_r2(spec.band_hz, kR1, spec.c1_c3, spec.c2), spec.r2_min(),
                         spec.r2_max());
  double r3 = std::clamp(kR3Start, kR3Min, spec.r3_pot_max);
  if (seed) {
    r2 = seed->r2;
    r3 = seed->r3;
  }

  for (int it = 0;; ++it) {
    const twint::PeakPoint pk = channel_peak(spec, r2, r3);
    if (std::abs(pk.f_peak - spec.band_hz) <= opts.tol_freq_hz &&
        std::abs(pk.gain_db - opts.target_gain_db) <= opts.tol_gain_db) {
      CalibrationResult out;
      out.r2 = r2;
      out.r3 = r3;
      out.q = to_bandpass_factors(channel_response(spec, r2, r3)).q;
      out.f_peak = pk.f_peak;
      out.gain_db = pk.gain_db;
      out.iterations = it;
      out.r2_beyond_pot = r2 > spec.r2_fixed + spec.r2_pot_max;
      return out;
    }
    if (it == opts.max_iterations)
      throw ConvergenceError(fmt::format("{} Hz band did not converge in {} iterations", spec.band_hz,
                                         opts.max_iterations));

    r3 = bisect([&](double x) { return channel_peak(spec, r2, x).gain_db - opts.target_gain_db; },
                kR3Min, spec.r3_pot_max, "gain");
    r2 = bisect([&](double x) { return channel_peak(spec, x, r3).f_peak - spec.band_hz; },
                spec.r2_min(), spec.r2_max(), "frequency");
  }
}

std::vector<ChannelOutcome> calibrate_all(const std::vector<ChannelSpec>& specs,
                                          const CalibrationOptions& opts) {
  std::vector<std::future<CalibrationResult>> jobs;
  jobs.reserve(specs.size());
  for (const auto& spec : specs)
    jobs.push_back(std::async(std::launch::async, [spec, opts] { return calibrate_channel(spec, opts); }));

  std::vector<ChannelOutcome> out;
  out.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ChannelOutcome o{specs[i], std::nullopt, {}};
    try {
      o.result = jobs[i].get();
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ChannelOutcome& a, const ChannelOutcome& b) { return a.spec.band_hz < b.spec.band_hz; });
  return out;
}

}  // namespace b295::calibrate
