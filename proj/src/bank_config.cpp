#include "b295/bank_config.hpp"

#include "b295/mna.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace b295::filterbank {

namespace {

using nlohmann::json;

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("bank config: " + what) {}
};

double number(const json& v, std::string_view key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return mna::parse_value(v.get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(fmt::format("'{}': {}", key, e.what()));
    }
  }
  throw ConfigError(fmt::format("'{}' must be a number", key));
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

SallenKeyConfig sallen_key(const json& obj, SallenKeyConfig cfg, std::string_view where) {
  check_keys(obj, {"cutoff_hz", "components"}, where);
  if (obj.contains("cutoff_hz")) cfg.cutoff_hz = number(obj["cutoff_hz"], "cutoff_hz");
  if (obj.contains("components")) {
    const json& parts = obj["components"];
    check_keys(parts, {"r", "c"}, "components");
    SallenKeyComponents sk;
    for (const char* key : {"r", "c"}) {
      const json& arr = parts.contains(key) ? parts[key] : json();
      if (!arr.is_array() || arr.size() != 3)
        throw ConfigError(fmt::format("components.{} needs three values", key));
      auto& dest = key[0] == 'r' ? sk.r : sk.c;
      for (std::size_t i = 0; i < 3; ++i) dest[i] = number(arr[i], key);
    }
    cfg.components = sk;
  }
  return cfg;
}

}  // namespace

std::set<std::size_t> parse_inversions(std::string_view text) {
  if (text == "default") return default_inversion_pattern();
  if (text == "none") return {};
  std::set<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw std::invalid_argument(fmt::format("bad inversion list entry '{}'", item));
    if (value >= kChannelCount) throw std::invalid_argument(fmt::format("inversion index {} out of range", value));
    out.insert(value);
    start = end + 1;
  }
  return out;
}

BankConfig parse_bank_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(e.what());
  }
  check_keys(root, {"lowpass", "highpass", "bands", "inversions", "sliders"}, "top level");

  SallenKeyConfig lowpass{SallenKeyKind::Lowpass, 100.0, std::nullopt};
  SallenKeyConfig highpass{SallenKeyKind::Highpass, 7000.0, std::nullopt};
  if (root.contains("lowpass")) lowpass = sallen_key(root["lowpass"], lowpass, "lowpass");
  if (root.contains("highpass")) highpass = sallen_key(root["highpass"], highpass, "highpass");

  std::vector<calibrate::ChannelSpec> specs = calibrate::default_specs();
  std::vector<std::optional<double>> r2(specs.size()), r3(specs.size());
  if (root.contains("bands")) {
    const json& bands = root["bands"];
    if (!bands.is_array() || bands.size() != specs.size())
      throw ConfigError(fmt::format("'bands' needs {} entries", specs.size()));
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const json& b = bands[i];
      check_keys(b, {"band_hz", "c1_c3", "c2", "r2_fixed", "r2_pot_max", "r3_pot_max", "r2_overtravel",
                     "attenuation", "mixer_r", "r2", "r3"},
                 "band");
      auto& s = specs[i];
      for (auto [key, field] : {std::pair{"band_hz", &s.band_hz}, {"c1_c3", &s.c1_c3}, {"c2", &s.c2},
                                {"r2_fixed", &s.r2_fixed}, {"r2_pot_max", &s.r2_pot_max},
                                {"r3_pot_max", &s.r3_pot_max}, {"r2_overtravel", &s.r2_overtravel},
                                {"mixer_r", &s.mixer_r}})
        if (b.contains(key)) *field = number(b[key], key);
      if (b.contains("attenuation")) {
        const json& a = b["attenuation"];
        if (a == "low_330") s.attenuation = calibrate::Attenuation::Low330;
        else if (a == "high_480") s.attenuation = calibrate::Attenuation::High480;
        else throw ConfigError("attenuation must be \"low_330\" or \"high_480\"");
      }
      if (b.contains("r2")) r2[i] = number(b["r2"], "r2");
      if (b.contains("r3")) r3[i] = number(b["r3"], "r3");
      if (r2[i].has_value() != r3[i].has_value())
        throw ConfigError(fmt::format("band {} sets only one of r2/r3", i));
    }
  }

  std::vector<calibrate::ChannelSpec> pending;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!r2[i]) pending.push_back(specs[i]);
  auto solved = calibrate::calibrate_all(pending);
  std::vector<calibrate::CalibrationResult> results(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (r2[i]) {
      results[i].r2 = *r2[i];
      results[i].r3 = *r3[i];
      continue;
    }
    // calibrate_all sorts by band; match on band frequency.
    auto it = std::find_if(solved.begin(), solved.end(),
                           [&](const calibrate::ChannelOutcome& o) { return o.spec.band_hz == specs[i].band_hz; });
    if (it == solved.end() || !it->result)
      throw ConfigError(fmt::format("{} Hz band failed to calibrate: {}", specs[i].band_hz,
                                    it == solved.end() ? "missing" : it->error));
    results[i] = *it->result;
    solved.erase(it);
  }

  BankConfig bank = make_bank(specs, results);
  bank.channels.front() = lowpass;
  bank.channels.back() = highpass;

  if (root.contains("inversions")) {
    const json& inv = root["inversions"];
    if (inv.is_string()) {
      bank.inversion_pattern = parse_inversions(inv.get<std::string>());
    } else if (inv.is_array()) {
      bank.inversion_pattern.clear();
      for (const json& v : inv) {
        if (!v.is_number_unsigned()) throw ConfigError("inversion indices must be non-negative integers");
        bank.inversion_pattern.insert(v.get<std::size_t>());
      }
    } else {
      throw ConfigError("'inversions' must be \"default\", \"none\" or an index array");
    }
  }
  if (root.contains("sliders")) {
    const json& sl = root["sliders"];
    if (!sl.is_array()) throw ConfigError("'sliders' must be an array");
    bank.slider_gains.clear();
    for (const json& v : sl) bank.slider_gains.push_back(number(v, "sliders"));
  }
  try {
    bank.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return bank;
}

BankConfig load_bank_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bank config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_bank_config(buf.str());
}

}  // namespace b295::filterbank
