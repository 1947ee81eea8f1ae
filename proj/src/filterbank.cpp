#include "b295/filterbank.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace b295::filterbank {

void SallenKeyConfig::validate() const {
  if (!(cutoff_hz > 0.0)) throw std::invalid_argument("Sallen-Key cutoff must be positive");
  if (kind != SallenKeyKind::Lowpass && kind != SallenKeyKind::Highpass)
    throw std::invalid_argument("invalid Sallen-Key kind");
  if (components) {
    for (double v : components->r)
      if (!(v > 0.0)) throw std::invalid_argument("Sallen-Key resistances must be positive");
    for (double v : components->c)
      if (!(v > 0.0)) throw std::invalid_argument("Sallen-Key capacitances must be positive");
  }
}

mna::Netlist sallen_key_netlist(SallenKeyKind kind, const SallenKeyComponents& parts) {
  mna::Netlist n;
  const auto& r = parts.r;
  const auto& c = parts.c;
  if (kind == SallenKeyKind::Lowpass) {
    n.elements = {
        mna::Resistor{"R1", "in", "a", r[0]},  mna::Resistor{"R2", "a", "b", r[1]},
        mna::Resistor{"R3", "b", "c", r[2]},   mna::Capacitor{"C1", "a", "0", c[0]},
        mna::Capacitor{"C2", "b", "out", c[1]}, mna::Capacitor{"C3", "c", "0", c[2]},
    };
  } else {
    n.elements = {
        mna::Capacitor{"C1", "in", "a", c[0]}, mna::Capacitor{"C2", "a", "b", c[1]},
        mna::Capacitor{"C3", "b", "c", c[2]},  mna::Resistor{"R1", "a", "0", r[0]},
        mna::Resistor{"R2", "b", "out", r[1]}, mna::Resistor{"R3", "c", "0", r[2]},
    };
  }
  n.elements.emplace_back(mna::IdealOpamp{"O1", "c", "out", "out"});
  n.nodes = {"in", "a", "b", "c", "out"};
  n.input_node = "in";
  n.output_node = "out";
  n.validate();
  return n;
}

RationalFunction sallen_key_tf(const SallenKeyConfig& cfg) {
  cfg.validate();
  if (cfg.components) return mna::transfer_function(sallen_key_netlist(cfg.kind, *cfg.components));
  const double wc = 2.0 * std::numbers::pi * cfg.cutoff_hz;
  if (cfg.kind == SallenKeyKind::Lowpass)
    return normalize(Polynomial{1.0}, Polynomial{1.0, 2.0 / wc, 2.0 / (wc * wc), 1.0 / (wc * wc * wc)});
  return normalize(Polynomial{0.0, 0.0, 0.0, 1.0}, Polynomial{wc * wc * wc, 2.0 * wc * wc, 2.0 * wc, 1.0});
}

double nominal_hz(const ChannelConfig& ch) {
  if (const auto* sk = std::get_if<SallenKeyConfig>(&ch)) return sk->cutoff_hz;
  return std::get<BandChannel>(ch).spec.band_hz;
}

void BankConfig::validate() const {
  if (channels.size() != kChannelCount)
    throw std::invalid_argument(fmt::format("bank needs {} channels, got {}", kChannelCount, channels.size()));
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (const auto* sk = std::get_if<SallenKeyConfig>(&channels[i])) sk->validate();
    else std::get<BandChannel>(channels[i]).spec.validate();
    if (i > 0 && !(nominal_hz(channels[i]) > nominal_hz(channels[i - 1])))
      throw std::invalid_argument("bank channels must be in increasing frequency order");
  }
  if (slider_gains.size() != kChannelCount)
    throw std::invalid_argument(fmt::format("bank needs {} slider gains", kChannelCount));
  for (double g : slider_gains)
    if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("slider gains must lie in [0, 1]");
  for (std::size_t i : inversion_pattern)
    if (i >= kChannelCount) throw std::invalid_argument(fmt::format("inversion index {} out of range", i));
}

std::set<std::size_t> default_inversion_pattern() { return {1, 3, 5, 7, 9}; }

double end_channel_gain() { return calibrate::kInputGain * calibrate::kMixerFeedback / 33e3; }

BankConfig make_bank(const std::vector<calibrate::ChannelSpec>& specs,
                     const std::vector<calibrate::CalibrationResult>& results) {
  if (specs.size() != kChannelCount - 2 || results.size() != specs.size())
    throw std::invalid_argument("make_bank needs eight bands with trimmer settings");
  BankConfig bank;
  bank.channels.emplace_back(SallenKeyConfig{SallenKeyKind::Lowpass, 100.0, std::nullopt});
  for (std::size_t i = 0; i < specs.size(); ++i) {
    calibrate::ChannelSpec spec = specs[i];
    spec.inverted = false;
    bank.channels.emplace_back(BandChannel{spec, results[i].r2, results[i].r3});
  }
  bank.channels.emplace_back(SallenKeyConfig{SallenKeyKind::Highpass, 7000.0, std::nullopt});
  bank.inversion_pattern = default_inversion_pattern();
  bank.validate();
  return bank;
}

BankConfig default_bank() {
  const auto specs = calibrate::default_specs();
  std::vector<calibrate::CalibrationResult> results;
  for (const auto& o : calibrate::calibrate_all(specs)) {
    if (!o.result) throw Error(fmt::format("{} Hz band failed to calibrate: {}", o.spec.band_hz, o.error));
    results.push_back(*o.result);
  }
  return make_bank(specs, results);
}

namespace {

// Channel response before inversion and slider.
RationalFunction base_tf(const BankConfig& bank, std::size_t index) {
  if (index >= bank.channels.size()) throw std::out_of_range(fmt::format("channel index {} out of range", index));
  if (const auto* sk = std::get_if<SallenKeyConfig>(&bank.channels[index]))
    return scaled(sallen_key_tf(*sk), end_channel_gain());
  BandChannel band = std::get<BandChannel>(bank.channels[index]);
  band.spec.inverted = false;
  return calibrate::channel_response(band.spec, band.r2, band.r3);
}

double channel_gain(const BankConfig& bank, std::size_t index) {
  const double sign = bank.inversion_pattern.count(index) ? -1.0 : 1.0;
  return sign * (index < bank.slider_gains.size() ? bank.slider_gains[index] : 1.0);
}

}  // namespace

RationalFunction channel_tf(const BankConfig& bank, std::size_t index) {
  return scaled(base_tf(bank, index), channel_gain(bank, index));
}

SweepRow make_row(double f, Complex h) {
  SweepRow row;
  row.f = f;
  const double mag = std::abs(h);
  row.magnitude_db = mag > 0.0 ? 20.0 * std::log10(mag) : -std::numeric_limits<double>::infinity();
  row.phase_deg = std::arg(h) * 180.0 / std::numbers::pi;
  row.re = h.real();
  row.im = h.imag();
  return row;
}

namespace {

void check_increasing(const std::vector<double>& freqs) {
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!(freqs[i] > 0.0)) throw std::invalid_argument("sweep frequencies must be positive");
    if (i > 0 && !(freqs[i] > freqs[i - 1]))
      throw std::invalid_argument("sweep frequencies must be strictly increasing");
  }
}

}  // namespace

SweepResult sweep(const RationalFunction& h, const std::vector<double>& freqs) {
  check_increasing(freqs);
  SweepResult out;
  out.reserve(freqs.size());
  for (double f : freqs) out.push_back(make_row(f, evaluate(h, 2.0 * std::numbers::pi * f)));
  return out;
}

SweepResult channel_sweep(const BankConfig& bank, std::size_t index, const std::vector<double>& freqs) {
  bank.validate();
  check_increasing(freqs);
  const RationalFunction h = base_tf(bank, index);
  const double gain = channel_gain(bank, index);
  SweepResult out;
  out.reserve(freqs.size());
  for (double f : freqs) out.push_back(make_row(f, evaluate(h, 2.0 * std::numbers::pi * f) * gain));
  return out;
}

SweepResult summed_sweep(const BankConfig& bank, const std::vector<double>& freqs) {
  bank.validate();
  check_increasing(freqs);
  std::vector<RationalFunction> tfs;
  std::vector<double> gains;
  for (std::size_t i = 0; i < bank.channels.size(); ++i) {
    tfs.push_back(base_tf(bank, i));
    gains.push_back(channel_gain(bank, i));
  }
  SweepResult out;
  out.reserve(freqs.size());
  for (double f : freqs) {
    Complex total{0.0, 0.0};
    for (std::size_t i = 0; i < tfs.size(); ++i) total += evaluate(tfs[i], 2.0 * std::numbers::pi * f) * gains[i];
    out.push_back(make_row(f, total));
  }
  return out;
}

double ripple_db(const SweepResult& rows, double f_lo, double f_hi) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (const auto& r : rows) {
    if (r.f < f_lo || r.f > f_hi) continue;
    lo = std::min(lo, r.magnitude_db);
    hi = std::max(hi, r.magnitude_db);
    ++count;
  }
  if (count < 2) throw std::invalid_argument(fmt::format("fewer than two sweep rows in [{}, {}] Hz", f_lo, f_hi));
  return hi - lo;
}

std::vector<double> log_space(double f_lo, double f_hi, std::size_t points) {
  if (!(f_lo > 0.0 && f_hi > f_lo) || points < 2)
    throw std::invalid_argument("log_space needs 0 < f_lo < f_hi and at least two points");
  std::vector<double> out(points);
  const double a = std::log(f_lo);
  const double step = (std::log(f_hi) - a) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = std::exp(a + step * static_cast<double>(i));
  out.front() = f_lo;
  out.back() = f_hi;
  return out;
}

std::vector<double> lin_space(double f_lo, double f_hi, std::size_t points) {
  if (!(f_lo > 0.0 && f_hi > f_lo) || points < 2)
    throw std::invalid_argument("lin_space needs 0 < f_lo < f_hi and at least two points");
  std::vector<double> out(points);
  const double step = (f_hi - f_lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = f_lo + step * static_cast<double>(i);
  out.back() = f_hi;
  return out;
}

}  // namespace b295::filterbank
