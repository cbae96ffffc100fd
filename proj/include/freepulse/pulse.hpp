#pragma once

// Piecewise-constant pulse schedules and the templates that map a real
// parameter vector onto them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "freepulse/device.hpp"
#include "freepulse/errors.hpp"
#include "freepulse/operators.hpp"

namespace freepulse {

struct Segment {
  int duration_dt = 0;
  cplx amplitude{0.0, 0.0};

  bool operator==(const Segment&) const = default;
};

enum class PadMode { Right, Middle, Left };

inline PadMode parse_pad_mode(const std::string& s) {
  if (s == "right") return PadMode::Right;
  if (s == "middle") return PadMode::Middle;
  if (s == "left") return PadMode::Left;
  throw UnknownName("unknown padding mode '" + s + "'");
}

class PulseSchedule {
 public:
  PulseSchedule() = default;

  explicit PulseSchedule(std::map<ChannelId, std::vector<Segment>> channels, bool clamped = false)
      : channels_(std::move(channels)), clamped_(clamped) {
    total_dt_ = -1;
    for (const auto& [ch, segs] : channels_) {
      int sum = 0;
      for (const auto& s : segs) {
        if (s.duration_dt < 0) throw ValidationError("negative segment duration on " + ch.label());
        if (std::abs(s.amplitude) > 1.0 + 1e-12) {
          throw ValidationError("amplitude exceeds 1 on " + ch.label());
        }
        sum += s.duration_dt;
      }
      if (total_dt_ >= 0 && sum != total_dt_) {
        throw ValidationError("channel " + ch.label() + " duration differs from the others");
      }
      total_dt_ = sum;
    }
    if (total_dt_ < 0) total_dt_ = 0;
  }

  const std::map<ChannelId, std::vector<Segment>>& channels() const { return channels_; }
  int total_dt() const { return total_dt_; }
  bool clamped() const { return clamped_; }

  /// Amplitude on `ch` during sample `index` (0-based, in dt units).
  cplx amplitude(const ChannelId& ch, int index) const {
    const auto it = channels_.find(ch);
    if (it == channels_.end()) return {};
    int start = 0;
    for (const auto& s : it->second) {
      if (index < start + s.duration_dt) return s.amplitude;
      start += s.duration_dt;
    }
    return {};
  }

  /// One amplitude per dt sample.
  std::vector<cplx> samples(const ChannelId& ch) const {
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(total_dt_));
    const auto it = channels_.find(ch);
    if (it == channels_.end()) return std::vector<cplx>(static_cast<std::size_t>(total_dt_));
    for (const auto& s : it->second) out.insert(out.end(), static_cast<std::size_t>(s.duration_dt), s.amplitude);
    return out;
  }

  bool operator==(const PulseSchedule& o) const {
    return channels_ == o.channels_ && total_dt_ == o.total_dt_;
  }

 private:
  std::map<ChannelId, std::vector<Segment>> channels_;
  int total_dt_ = 0;
  bool clamped_ = false;
};

/// A span of the schedule in which the listed channels carry one tunable
/// amplitude each; all other channels are idle.
struct TemplateBlock {
  int duration_dt = 0;
  std::vector<ChannelId> active;
};

struct ScheduleTemplate {
  std::vector<ChannelId> channels;
  std::vector<TemplateBlock> blocks;

  int tunable_slots() const {
    int n = 0;
    for (const auto& b : blocks) n += static_cast<int>(b.active.size());
    return n;
  }

  int parameter_count() const { return 2 * tunable_slots(); }

  int total_dt() const {
    int n = 0;
    for (const auto& b : blocks) n += b.duration_dt;
    return n;
  }

  bool is_active(const TemplateBlock& b, const ChannelId& ch) const {
    return std::find(b.active.begin(), b.active.end(), ch) != b.active.end();
  }
};

/// Builds a schedule from (Re, Im) pairs packed channel-major in the
/// template's channel order, blocks in time order within each channel.
/// Amplitudes outside the unit disk are projected radially onto it.
inline PulseSchedule from_params(const ScheduleTemplate& tpl, const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != tpl.parameter_count()) {
    throw LengthMismatch("expected " + std::to_string(tpl.parameter_count()) +
                         " parameters, got " + std::to_string(theta.size()));
  }
  std::map<ChannelId, std::vector<Segment>> channels;
  bool clamped = false;
  std::size_t p = 0;
  for (const auto& ch : tpl.channels) {
    auto& segs = channels[ch];
    for (const auto& b : tpl.blocks) {
      cplx a{0.0, 0.0};
      if (tpl.is_active(b, ch)) {
        a = cplx(theta[p], theta[p + 1]);
        p += 2;
        const double mag = std::abs(a);
        if (!std::isfinite(mag)) throw NonFiniteObjective("non-finite pulse parameter");
        if (mag > 1.0) {
          a /= mag;
          clamped = true;
        }
      }
      segs.push_back({b.duration_dt, a});
    }
  }
  return PulseSchedule(std::move(channels), clamped);
}

/// Inverse of from_params for schedules laid out on the template's blocks.
inline std::vector<double> to_params(const ScheduleTemplate& tpl, const PulseSchedule& s) {
  std::vector<double> theta;
  theta.reserve(static_cast<std::size_t>(tpl.parameter_count()));
  for (const auto& ch : tpl.channels) {
    int start = 0;
    for (const auto& b : tpl.blocks) {
      if (tpl.is_active(b, ch)) {
        const cplx a = s.amplitude(ch, start);
        theta.push_back(a.real());
        theta.push_back(a.imag());
      }
      start += b.duration_dt;
    }
  }
  return theta;
}

inline PulseSchedule pad(const PulseSchedule& s, int target_dt, PadMode mode = PadMode::Right) {
  if (target_dt < s.total_dt()) {
    throw TargetTooSmall("pad target " + std::to_string(target_dt) + " dt is shorter than the schedule (" +
                         std::to_string(s.total_dt()) + " dt)");
  }
  const int extra = target_dt - s.total_dt();
  if (extra == 0) return s;
  int before = 0;
  switch (mode) {
    case PadMode::Right: before = 0; break;
    case PadMode::Left: before = extra; break;
    case PadMode::Middle: before = extra / 2; break;
  }
  const int after = extra - before;
  auto channels = s.channels();
  for (auto& [ch, segs] : channels) {
    if (before > 0) segs.insert(segs.begin(), Segment{before, {}});
    if (after > 0) segs.push_back(Segment{after, {}});
  }
  return PulseSchedule(std::move(channels), s.clamped());
}

/// Every channel tunable in every bin.
inline ScheduleTemplate uniform_template(const DeviceModel& dev, int n_bins, int bin_width_dt,
                                         bool bidirectional) {
  if (n_bins < 1 || bin_width_dt < 1) {
    throw PreconditionError("uniform_template: n_bins and bin_width_dt must be >= 1");
  }
  ScheduleTemplate tpl;
  tpl.channels = enumerate_channels(dev, bidirectional);
  for (int b = 0; b < n_bins; ++b) tpl.blocks.push_back({bin_width_dt, tpl.channels});
  return tpl;
}

/// Single-qubit drive channels only, tunable in every bin.
inline ScheduleTemplate drives_only_template(const DeviceModel& dev, int n_bins, int bin_width_dt) {
  auto tpl = uniform_template(dev, n_bins, bin_width_dt, false);
  std::erase_if(tpl.channels, [](const ChannelId& c) { return !c.is_drive(); });
  for (auto& b : tpl.blocks) b.active = tpl.channels;
  return tpl;
}

/// Drives (56 dt), u0_1 (152 dt), u1_2 (152 dt), drives (56 dt) on a
/// 3-qubit chain with one control direction per edge.
inline ScheduleTemplate lih_compact_template(const DeviceModel& dev) {
  if (dev.n_qubits() != 3 || !dev.is_linear_chain()) {
    throw TopologyMismatch("compact template needs a 3-qubit linear chain, device has " +
                           std::to_string(dev.n_qubits()) + " qubits");
  }
  const std::vector<ChannelId> drives{ChannelId::drive(0), ChannelId::drive(1), ChannelId::drive(2)};
  ScheduleTemplate tpl;
  tpl.channels = enumerate_channels(dev, false);
  tpl.blocks = {{56, drives},
                {152, {ChannelId::control(0, 1)}},
                {152, {ChannelId::control(1, 2)}},
                {56, drives}};
  return tpl;
}

/// Template layout plus the zero-amplitude idle tail a padded run appends.
inline ScheduleTemplate padded_template(ScheduleTemplate tpl, int target_dt, PadMode mode) {
  const int extra = target_dt - tpl.total_dt();
  if (extra < 0) throw TargetTooSmall("pad target shorter than the template");
  if (extra == 0) return tpl;
  const int before = mode == PadMode::Right ? 0 : (mode == PadMode::Left ? extra : extra / 2);
  const int after = extra - before;
  if (before > 0) tpl.blocks.insert(tpl.blocks.begin(), TemplateBlock{before, {}});
  if (after > 0) tpl.blocks.push_back(TemplateBlock{after, {}});
  return tpl;
}

inline nlohmann::json schedule_to_json(const PulseSchedule& s) {
  nlohmann::json j;
  j["total_dt"] = s.total_dt();
  j["clamped"] = s.clamped();
  auto& chans = j["channels"];
  chans = nlohmann::json::array();
  for (const auto& [ch, segs] : s.channels()) {
    nlohmann::json c;
    c["channel"] = ch.label();
    c["segments"] = nlohmann::json::array();
    for (const auto& seg : segs) {
      c["segments"].push_back({{"duration_dt", seg.duration_dt},
                               {"re", seg.amplitude.real()},
                               {"im", seg.amplitude.imag()}});
    }
    chans.push_back(std::move(c));
  }
  return j;
}

inline PulseSchedule schedule_from_json(const nlohmann::json& j) {
  std::map<ChannelId, std::vector<Segment>> channels;
  try {
    for (const auto& c : j.at("channels")) {
      auto& segs = channels[ChannelId::parse(c.at("channel").get<std::string>())];
      for (const auto& seg : c.at("segments")) {
        segs.push_back({seg.at("duration_dt").get<int>(),
                        cplx(seg.at("re").get<double>(), seg.at("im").get<double>())});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed schedule JSON: ") + e.what());
  }
  return PulseSchedule(std::move(channels), j.value("clamped", false));
}

}  // namespace freepulse
