#pragma once

// Top-down biasing applied to events before the saliency stage.

#include <optional>
#include <string>
#include <string_view>

#include "foveal/errors.hpp"
#include "foveal/events.hpp"
#include "foveal/fixed.hpp"

namespace foveal {

struct RegionOfInterest {
  std::uint32_t x0 = 0, y0 = 0, x1 = 239, y1 = 179;

  constexpr bool contains(std::uint32_t x, std::uint32_t y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  static constexpr RegionOfInterest full(Resolution r) { return {0, 0, r.width - 1, r.height - 1}; }
  friend constexpr bool operator==(RegionOfInterest, RegionOfInterest) = default;
};

enum class TopDownMode { Off, Gating, Modulation };

inline std::string_view to_string(TopDownMode m) {
  switch (m) {
    case TopDownMode::Gating: return "gating";
    case TopDownMode::Modulation: return "modulation";
    default: return "off";
  }
}

inline std::optional<TopDownMode> parse_topdown_mode(std::string_view s) {
  if (s == "off") return TopDownMode::Off;
  if (s == "gating") return TopDownMode::Gating;
  if (s == "modulation") return TopDownMode::Modulation;
  return std::nullopt;
}

struct TopDownConfig {
  TopDownMode mode = TopDownMode::Off;
  RegionOfInterest roi;
  Fixed gain_inside = Fixed::one();
  Fixed gain_outside = Fixed::from_raw(Fixed::kOne / 4);

  void validate(Resolution res) const {
    if (roi.x0 > roi.x1 || roi.y0 > roi.y1) throw ConfigError("topdown.roi must satisfy x0 <= x1 and y0 <= y1");
    if (!res.contains(roi.x1, roi.y1)) throw ConfigError("topdown.roi must lie within the sensor");
    if (gain_outside < Fixed::zero()) throw ConfigError("topdown.gain_outside must be >= 0");
    if (gain_inside < gain_outside) throw ConfigError("topdown.gain_inside must be >= topdown.gain_outside");
  }
};

/// Hard gate: drops events outside the ROI. Identity unless mode is gating.
constexpr std::optional<Event> gate(const Event& e, const TopDownConfig& cfg) {
  if (cfg.mode != TopDownMode::Gating || cfg.roi.contains(e.x, e.y)) return e;
  return std::nullopt;
}

/// State-increment gain for `e`: 1.0 unless mode is modulation.
constexpr Fixed modulation_gain(const Event& e, const TopDownConfig& cfg) {
  if (cfg.mode != TopDownMode::Modulation) return Fixed::one();
  return cfg.roi.contains(e.x, e.y) ? cfg.gain_inside : cfg.gain_outside;
}

}  // namespace foveal
