#pragma once

// Device description: per-qubit parameters, coupling graph and the sampling
// period dt. Frequencies are stored in Hz (cycles per second); the angular
// value used in Hamiltonians is 2*pi times the stored number.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "freepulse/errors.hpp"
#include "freepulse/textfile.hpp"

namespace freepulse {

/// Exact rational number of nanoseconds.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw ValidationError("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const auto g = std::gcd(n, d);
    return {n / (g == 0 ? 1 : g), d / (g == 0 ? 1 : g)};
  }

  /// Parses "2/9", "0.5" or "1".
  static Rational parse(const std::string& text) {
    const std::string t = text::trim(text);
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
      const Rational a = parse(t.substr(0, slash));
      const Rational b = parse(t.substr(slash + 1));
      return make(a.num * b.den, a.den * b.num);
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool seen_dot = false;
    bool any_digit = false;
    for (char c : t) {
      if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else if (c >= '0' && c <= '9') {
        any_digit = true;
        num = num * 10 + (c - '0');
        if (seen_dot) den *= 10;
        if (den > 1'000'000'000'000LL || num > 1'000'000'000'000'000LL) {
          throw ValidationError("rational '" + t + "' has too many digits");
        }
      } else {
        throw ValidationError("not a rational number: '" + t + "'");
      }
    }
    if (!any_digit) throw ValidationError("not a rational number: '" + t + "'");
    return make(num, den);
  }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }
};

struct QubitParams {
  double freq_z = 0.0;         // Hz
  double drive_freq = 0.0;     // Hz
  double coupling_rate = 0.0;  // Hz
  double anharmonicity = -330e6;
  double t1 = std::numeric_limits<double>::infinity();  // s
  double t2 = std::numeric_limits<double>::infinity();  // s
  int levels = 2;
};

struct Edge {
  int k = 0;
  int l = 0;
  double j = 0.0;  // Hz
};

struct ChannelId {
  enum class Kind { Drive, Control };

  Kind kind = Kind::Drive;
  int k = 0;
  int l = -1;

  static ChannelId drive(int k) { return {Kind::Drive, k, -1}; }
  static ChannelId control(int k, int l) { return {Kind::Control, k, l}; }

  bool is_drive() const { return kind == Kind::Drive; }

  std::string label() const {
    return is_drive() ? "d" + std::to_string(k)
                      : "u" + std::to_string(k) + "_" + std::to_string(l);
  }

  static ChannelId parse(const std::string& s) {
    try {
      if (s.size() >= 2 && s[0] == 'd') return drive(std::stoi(s.substr(1)));
      const auto us = s.find('_');
      if (s.size() >= 4 && s[0] == 'u' && us != std::string::npos) {
        return control(std::stoi(s.substr(1, us - 1)), std::stoi(s.substr(us + 1)));
      }
    } catch (const std::logic_error&) {
    }
    throw UnknownName("not a channel label: '" + s + "'");
  }

  // Drives first, then controls, each ordered by qubit indices.
  auto operator<=>(const ChannelId&) const = default;
};

struct DeviceModel {
  std::string name;
  std::vector<QubitParams> qubits;
  std::vector<Edge> edges;  // undirected, stored with k < l
  Rational dt_ns{1, 1};

  int n_qubits() const { return static_cast<int>(qubits.size()); }
  double dt() const { return dt_ns.value() * 1e-9; }

  bool has_edge(int k, int l) const {
    return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
      return (e.k == k && e.l == l) || (e.k == l && e.l == k);
    });
  }

  double coupling(int k, int l) const {
    for (const auto& e : edges) {
      if ((e.k == k && e.l == l) || (e.k == l && e.l == k)) return e.j;
    }
    return 0.0;
  }

  bool is_linear_chain() const {
    const int n = n_qubits();
    if (static_cast<int>(edges.size()) != n - 1) return false;
    for (int k = 0; k + 1 < n; ++k) {
      if (!has_edge(k, k + 1)) return false;
    }
    return true;
  }

  void validate() const {
    if (qubits.empty()) throw ValidationError("device has no qubits");
    if (!(dt_ns.num > 0 && dt_ns.den > 0)) throw ValidationError("dt must be positive");
    for (std::size_t i = 0; i < qubits.size(); ++i) {
      const auto& q = qubits[i];
      const std::string where = "qubit " + std::to_string(i) + ": ";
      if (!(q.coupling_rate > 0.0) || !std::isfinite(q.coupling_rate)) {
        throw ValidationError(where + "coupling_rate must be positive and finite");
      }
      if (!std::isfinite(q.freq_z) || !std::isfinite(q.drive_freq) || q.freq_z < 0.0 ||
          q.drive_freq < 0.0) {
        throw ValidationError(where + "frequencies must be finite and non-negative");
      }
      if (!std::isfinite(q.anharmonicity)) throw ValidationError(where + "anharmonicity must be finite");
      if (q.levels < 2) throw ValidationError(where + "levels must be >= 2");
      if (!(q.t1 > 0.0) || !(q.t2 > 0.0)) throw ValidationError(where + "t1 and t2 must be positive");
      if (std::isfinite(q.t1) && std::isfinite(q.t2) && q.t2 > 2.0 * q.t1 * (1.0 + 1e-12)) {
        throw ValidationError(where + "t2 <= 2*t1 violated");
      }
    }
    for (const auto& e : edges) {
      if (e.k < 0 || e.l < 0 || e.k >= n_qubits() || e.l >= n_qubits() || e.k == e.l) {
        throw ValidationError("edge (" + std::to_string(e.k) + "," + std::to_string(e.l) +
                              ") references an invalid qubit");
      }
      if (!std::isfinite(e.j)) throw ValidationError("edge coupling j must be finite");
    }
  }
};

/// All drives, then control channels ordered by (k, l). Without
/// bidirectional controls only the lower-index qubit of each edge controls.
inline std::vector<ChannelId> enumerate_channels(const DeviceModel& dev, bool bidirectional) {
  std::vector<ChannelId> out;
  for (int k = 0; k < dev.n_qubits(); ++k) out.push_back(ChannelId::drive(k));
  std::vector<ChannelId> controls;
  for (const auto& e : dev.edges) {
    const int lo = std::min(e.k, e.l);
    const int hi = std::max(e.k, e.l);
    controls.push_back(ChannelId::control(lo, hi));
    if (bidirectional) controls.push_back(ChannelId::control(hi, lo));
  }
  std::sort(controls.begin(), controls.end());
  out.insert(out.end(), controls.begin(), controls.end());
  return out;
}

inline int parameter_count(const DeviceModel& dev, int n_bins, bool bidirectional) {
  if (n_bins < 1) throw PreconditionError("parameter_count: n_bins must be >= 1");
  return 2 * n_bins * static_cast<int>(enumerate_channels(dev, bidirectional).size());
}

namespace detail {

inline constexpr const char* kPresetH2 = R"(# single transmon, parameters of the speed-limit study
dt_ns = 2/9
[qubit.0]
freq_z = 5.3615
drive_freq = 5.3615
coupling_rate = 0.2713740963766729
anharmonicity = -0.330
levels = 2
)";

// Same transmon with four levels. The drive coupling is calibrated so that
// the 1-dt experimental pulse leaks ~2.45e-7 into |2>,|3>.
inline constexpr const char* kPresetTransmon4 = R"(dt_ns = 2/9
[qubit.0]
freq_z = 5.3615
drive_freq = 5.3615
coupling_rate = 0.0762
anharmonicity = -0.330
levels = 4
)";

// 3-qubit linear chain with brisbane-like sampling (dt = 0.5 ns).
// J, anharmonicity, T1/T2 are placeholders, not measured values.
inline constexpr const char* kPresetChain3 = R"(dt_ns = 0.5
[qubit.0]
freq_z = 5.0
drive_freq = 5.0
coupling_rate = 0.15
t1 = 200000
t2 = 150000
[qubit.1]
freq_z = 5.1
drive_freq = 5.1
coupling_rate = 0.15
t1 = 200000
t2 = 150000
[qubit.2]
freq_z = 5.2
drive_freq = 5.2
coupling_rate = 0.15
t1 = 200000
t2 = 150000
[edge.0.1]
j = 0.002
[edge.1.2]
j = 0.002
)";

// 3-qubit linear chain with jakarta-like sampling (dt = 2/9 ns).
inline constexpr const char* kPresetJakarta3 = R"(dt_ns = 2/9
[qubit.0]
freq_z = 5.0
drive_freq = 5.0
coupling_rate = 0.15
t1 = 120000
t2 = 40000
[qubit.1]
freq_z = 5.1
drive_freq = 5.1
coupling_rate = 0.15
t1 = 120000
t2 = 40000
[qubit.2]
freq_z = 5.2
drive_freq = 5.2
coupling_rate = 0.15
t1 = 120000
t2 = 40000
[edge.0.1]
j = 0.002
[edge.1.2]
j = 0.002
)";

inline const std::map<std::string, const char*>& presets() {
  static const std::map<std::string, const char*> table{
      {"h2_1q", kPresetH2},
      {"transmon_4l", kPresetTransmon4},
      {"chain_3q", kPresetChain3},
      {"jakarta_3q", kPresetJakarta3},
  };
  return table;
}

inline int parse_index(const text::Document& doc, std::size_t line, const std::string& s) {
  int v = -1;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    doc.fail(line, "bad index '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline std::vector<std::string> device_preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, _] : detail::presets()) names.push_back(k);
  return names;
}

inline DeviceModel parse_device(std::string_view content, const std::string& source) {
  const auto doc = text::Document::parse(content, source);
  DeviceModel dev;
  dev.name = source;

  const auto& root = doc.root();
  const auto dt_text = doc.optional_string(root, "dt_ns");
  if (!dt_text) throw ValidationError(source + ": missing top-level dt_ns");
  try {
    dev.dt_ns = Rational::parse(*dt_text);
  } catch (const ValidationError& e) {
    doc.fail(root.entries.at("dt_ns").line, e.what());
  }
  for (const auto& [key, entry] : root.entries) {
    if (key != "dt_ns") doc.fail(entry.line, "unknown top-level key '" + key + "'");
  }

  std::map<int, QubitParams> qubits;
  std::map<std::pair<int, int>, double> couplings;
  static const std::vector<std::string> kQubitKeys{
      "freq_z", "drive_freq", "coupling_rate", "anharmonicity", "t1", "t2", "levels"};

  for (const auto& sec : doc.sections()) {
    if (sec.name.empty()) continue;
    const auto parts = text::split(sec.name, '.');
    if (parts.size() == 2 && parts[0] == "qubit") {
      const int k = detail::parse_index(doc, sec.line, parts[1]);
      for (const auto& [key, entry] : sec.entries) {
        if (std::find(kQubitKeys.begin(), kQubitKeys.end(), key) == kQubitKeys.end()) {
          doc.fail(entry.line, "unknown qubit key '" + key + "'");
        }
      }
      const std::string where = source + ": [" + sec.name + "] ";
      const auto fz = doc.optional_number(sec, "freq_z");
      const auto om = doc.optional_number(sec, "coupling_rate");
      if (!fz) throw ValidationError(where + "missing freq_z");
      if (!om) throw ValidationError(where + "missing coupling_rate");
      QubitParams q;
      q.freq_z = *fz * 1e9;
      q.drive_freq = doc.optional_number(sec, "drive_freq").value_or(*fz) * 1e9;
      q.coupling_rate = *om * 1e9;
      q.anharmonicity = doc.optional_number(sec, "anharmonicity").value_or(-0.330) * 1e9;
      q.t1 = doc.optional_number(sec, "t1").value_or(std::numeric_limits<double>::infinity()) * 1e-9;
      q.t2 = doc.optional_number(sec, "t2").value_or(std::numeric_limits<double>::infinity()) * 1e-9;
      const double levels = doc.optional_number(sec, "levels").value_or(2.0);
      if (levels != std::floor(levels)) doc.fail(sec.entries.at("levels").line, "levels must be an integer");
      q.levels = static_cast<int>(levels);
      qubits[k] = q;
    } else if (parts.size() == 3 && parts[0] == "edge") {
      const int k = detail::parse_index(doc, sec.line, parts[1]);
      const int l = detail::parse_index(doc, sec.line, parts[2]);
      for (const auto& [key, entry] : sec.entries) {
        if (key != "j") doc.fail(entry.line, "unknown edge key '" + key + "'");
      }
      const auto j = doc.optional_number(sec, "j");
      if (!j) throw ValidationError(source + ": [" + sec.name + "] missing coupling j");
      const auto key = std::make_pair(std::min(k, l), std::max(k, l));
      const auto it = couplings.find(key);
      if (it != couplings.end() && std::abs(it->second - *j * 1e9) > 1e-9 * std::abs(it->second)) {
        throw ValidationError(source + ": [" + sec.name + "] J not symmetric for the pair");
      }
      couplings[key] = *j * 1e9;
    } else {
      doc.fail(sec.line, "unknown section [" + sec.name + "]");
    }
  }

  int expected = 0;
  for (const auto& [k, q] : qubits) {
    if (k != expected++) throw ValidationError(source + ": qubit indices must be contiguous from 0");
    dev.qubits.push_back(q);
  }
  for (const auto& [kl, j] : couplings) dev.edges.push_back({kl.first, kl.second, j});
  dev.validate();
  return dev;
}

/// Loads a device file, or a bundled preset when given "preset:<name>".
inline DeviceModel load_device(const std::string& path) {
  constexpr std::string_view kPrefix = "preset:";
  if (path.rfind(kPrefix, 0) == 0) {
    const std::string name = path.substr(kPrefix.size());
    const auto it = detail::presets().find(name);
    if (it == detail::presets().end()) throw UnknownName("unknown device preset '" + name + "'");
    auto dev = parse_device(it->second, path);
    dev.name = name;
    return dev;
  }
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open device file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_device(buf.str(), path);
}

inline DeviceModel preset_device(const std::string& name) { return load_device("preset:" + name); }

}  // namespace freepulse
