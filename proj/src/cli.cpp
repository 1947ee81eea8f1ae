#include "b295/cli.hpp"

#include "b295/bank_config.hpp"
#include "b295/calibrate.hpp"
#include "b295/filterbank.hpp"
#include "b295/mna.hpp"
#include "b295/ratfunc.hpp"
#include "b295/twint.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

namespace b295::cli {

namespace {

namespace fb = filterbank;
namespace cal = calibrate;

constexpr double kRippleLo = 200.0;
constexpr double kRippleHi = 3200.0;
constexpr std::size_t kRipplePoints = 1000;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string csv(const fb::SweepResult& rows) {
  std::string s = "f_hz,mag_db,phase_deg,re,im\n";
  for (const auto& r : rows)
    s += fmt::format("{:.6e},{:.5e},{:.3e},{:.5e},{:.5e}\n", r.f, r.magnitude_db, r.phase_deg, r.re, r.im);
  return s;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

fb::BankConfig bank_from(const std::string& path) {
  return path.empty() ? fb::default_bank() : fb::load_bank_config(path);
}

std::string format_roots(const std::vector<Complex>& rs) {
  std::string s;
  for (Complex z : rs) s += fmt::format("  {:.9e} {:+.9e}j\n", z.real(), z.imag());
  if (rs.empty()) s += "  (none)\n";
  return s;
}

std::string format_poly(const Polynomial& p) {
  std::string s;
  if (p.is_zero()) return " 0";
  for (double c : p.coeffs()) s += fmt::format(" {:.12e}", c);
  return s;
}

void cmd_tf(const std::string& netlist_path, std::ostream& out) {
  const RationalFunction h = mna::transfer_function(mna::load_netlist(netlist_path));
  out << "# H(s) = sign * num(s) / den(s), coefficients in ascending powers of s\n";
  out << fmt::format("sign: {:+d}\n", h.sign);
  out << "num:" << format_poly(h.num) << "\n";
  out << "den:" << format_poly(h.den) << "\n";
  out << "zeros:\n" << format_roots(roots(h.num));
  out << "poles:\n" << format_roots(roots(h.den));
}

std::size_t channel_for_band(const fb::BankConfig& bank, double band_hz) {
  for (std::size_t i = 0; i < bank.channels.size(); ++i)
    if (const auto* b = std::get_if<fb::BandChannel>(&bank.channels[i]))
      if (std::abs(b->spec.band_hz - band_hz) <= 1e-9 * band_hz) return i;
  throw UsageError(fmt::format("no bandpass channel at {} Hz", band_hz));
}

std::string calibration_report(const std::vector<cal::ChannelOutcome>& outcomes, std::ostream& err, bool& failed) {
  std::string s = fmt::format("{:>7} {:>10} {:>10} {:>7} {:>11} {:>8} {:>10}\n", "band_hz", "R2_kohm", "R3_kohm",
                              "Q", "f_peak_hz", "gain_db", "iterations");
  bool beyond = false;
  for (const auto& o : outcomes) {
    if (!o.result) {
      failed = true;
      s += fmt::format("{:>7g} {:>10} {:>10} {:>7} {:>11} {:>8} {:>10}\n", o.spec.band_hz, "-", "-", "-", "-", "-",
                       "failed");
      err << fmt::format("error: {} Hz: {}\n", o.spec.band_hz, o.error);
      continue;
    }
    const auto& r = *o.result;
    beyond = beyond || r.r2_beyond_pot;
    s += fmt::format("{:>7g} {:>10.3f} {:>10.3f} {:>7.3f} {:>11.4f} {:>8.4f} {:>10d}{}\n", o.spec.band_hz,
                     r.r2 / 1e3, r.r3 / 1e3, r.q, r.f_peak, r.gain_db, r.iterations, r.r2_beyond_pot ? " *" : "");
  }
  if (beyond) s += "* R2 lies beyond the fixed resistor plus 100k trimmer\n";
  return s;
}

std::string table1_report() {
  std::string s = fmt::format("{:>7} {:>9} {:>9} {:>9} {:>13} {:>14} {:>15} {:>9}\n", "band_hz", "design_hz",
                              "C1=C3_nF", "C2_nF", "R2_range_kohm", "R2p_table_kohm", "R2p_calc_kohm", "dev_pct");
  for (const auto& row : cal::table1_rows()) {
    const double computed = twint::initial_r2(row.design_hz, cal::kR1, row.c1_c3, row.c2);
    const double dev = 100.0 * (computed - row.printed_r2_prime) / row.printed_r2_prime;
    s += fmt::format("{:>7g} {:>9g} {:>9.3f} {:>9.3f} {:>13} {:>14.1f} {:>15.2f} {:>+9.3f}\n", row.band_hz,
                     row.design_hz, row.c1_c3 * 1e9, row.c2 * 1e9,
                     fmt::format("{:g}-{:g}", row.r2_fixed / 1e3, (row.r2_fixed + 100e3) / 1e3),
                     row.printed_r2_prime / 1e3, computed / 1e3, dev);
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Twin-T bandpass filterbank analysis"};
  app.name("b295");
  app.require_subcommand(1);

  std::string netlist_path, out_path, bank_path, band_text = "all", inversions = "default";
  std::optional<double> band_hz;
  std::optional<std::size_t> channel;
  double fmin = 10.0, fmax = 20000.0, tol_freq = 0.05, tol_gain = 0.001;
  std::size_t points = 200;
  bool linear = false;

  auto* tf = app.add_subcommand("tf", "print the transfer function of a netlist");
  tf->add_option("--netlist", netlist_path, "netlist file")->required();

  auto* sweep = app.add_subcommand("sweep", "write a frequency sweep as CSV");
  auto* o_net = sweep->add_option("--netlist", netlist_path, "netlist file");
  auto* o_band = sweep->add_option("--band", band_hz, "calibrated bandpass channel by centre frequency");
  auto* o_chan = sweep->add_option("--channel", channel, "bank channel index 0-9");
  o_net->excludes(o_band, o_chan);
  o_band->excludes(o_chan);
  sweep->add_option("--fmin", fmin, "lowest frequency (Hz)")->check(CLI::PositiveNumber);
  sweep->add_option("--fmax", fmax, "highest frequency (Hz)")->check(CLI::PositiveNumber);
  sweep->add_option("--points", points, "number of rows")->check(CLI::Range(2, 1000000));
  sweep->add_flag("--linear", linear, "linear instead of log spacing");
  sweep->add_option("--out", out_path, "CSV output file (stdout if omitted)");
  sweep->add_option("--bank", bank_path, "bank configuration JSON");

  auto* calib = app.add_subcommand("calibrate", "solve the trimmers of the bandpass channels");
  calib->add_option("--band", band_text, "band in Hz, or 'all'");
  calib->add_option("--tol-freq", tol_freq, "peak frequency tolerance (Hz)")->check(CLI::PositiveNumber);
  calib->add_option("--tol-gain", tol_gain, "peak gain tolerance (dB)")->check(CLI::PositiveNumber);

  auto* table1 = app.add_subcommand("table1", "computed R2' against the published part values");

  auto* sum = app.add_subcommand("sum", "write the summed bank response as CSV");
  sum->add_option("--inversions", inversions, "default, none, or comma-separated channel indices");
  sum->add_option("--out", out_path, "CSV output file")->required();
  sum->add_option("--bank", bank_path, "bank configuration JSON");
  sum->add_option("--fmin", fmin, "lowest frequency (Hz)")->check(CLI::PositiveNumber);
  sum->add_option("--fmax", fmax, "highest frequency (Hz)")->check(CLI::PositiveNumber);
  sum->add_option("--points", points, "number of rows")->check(CLI::Range(2, 1000000));
  sum->add_flag("--linear", linear, "linear instead of log spacing");

  std::vector<std::string> argv_store{"b295"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    auto freqs = [&] {
      if (!(fmax > fmin)) throw UsageError("--fmax must exceed --fmin");
      return linear ? fb::lin_space(fmin, fmax, points) : fb::log_space(fmin, fmax, points);
    };

    if (*tf) {
      cmd_tf(netlist_path, out);
    } else if (*sweep) {
      const int sources = !netlist_path.empty() + band_hz.has_value() + channel.has_value();
      if (sources != 1) throw UsageError("sweep needs exactly one of --netlist, --band, --channel");
      const auto f = freqs();
      fb::SweepResult rows;
      if (!netlist_path.empty()) {
        rows = fb::sweep(mna::transfer_function(mna::load_netlist(netlist_path)), f);
      } else {
        const fb::BankConfig bank = bank_from(bank_path);
        const std::size_t index = band_hz ? channel_for_band(bank, *band_hz) : *channel;
        if (index >= fb::kChannelCount) throw UsageError("--channel must be 0-9");
        rows = fb::channel_sweep(bank, index, f);
      }
      emit(csv(rows), out_path, out);
    } else if (*calib) {
      std::vector<cal::ChannelSpec> specs = cal::default_specs();
      if (band_text != "all") {
        double wanted = 0.0;
        try {
          wanted = std::stod(band_text);
        } catch (const std::exception&) {
          throw UsageError("--band must be a frequency or 'all'");
        }
        std::erase_if(specs, [&](const cal::ChannelSpec& s) { return std::abs(s.band_hz - wanted) > 1e-9 * wanted; });
        if (specs.empty()) throw UsageError(fmt::format("no bandpass channel at {} Hz", band_text));
      }
      cal::CalibrationOptions opts;
      opts.tol_freq_hz = tol_freq;
      opts.tol_gain_db = tol_gain;
      bool failed = false;
      out << calibration_report(cal::calibrate_all(specs, opts), err, failed);
      if (failed) return 1;
    } else if (*table1) {
      out << table1_report();
    } else if (*sum) {
      fb::BankConfig bank = bank_from(bank_path);
      bank.inversion_pattern = fb::parse_inversions(inversions);
      emit(csv(fb::summed_sweep(bank, freqs())), out_path, out);
      const auto band = fb::summed_sweep(bank, fb::log_space(kRippleLo, kRippleHi, kRipplePoints));
      out << fmt::format("ripple_db[{:g}-{:g} Hz]: {:.4f}\n", kRippleLo, kRippleHi,
                         fb::ripple_db(band, kRippleLo, kRippleHi));
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace b295::cli
