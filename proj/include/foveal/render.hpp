#pragma once

// Time-surface images and trajectory overlays written as binary PGM / PPM.

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "foveal/errors.hpp"
#include "foveal/events.hpp"
#include "foveal/saliency.hpp"

namespace foveal {

struct TimeSurface {
  Resolution resolution;
  Timestamp t_ref = 0;
  Timestamp tau_vis = 50'000;
  std::vector<std::uint8_t> intensity;  // row-major

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return intensity[std::size_t{y} * resolution.width + x]; }
};

/// Intensity = round(255 * exp(-(t_ref - t_last) / tau_vis)) from each pixel's
/// most recent event; 0 for untouched pixels.
inline TimeSurface render_time_surface(std::span<const Event> events, Timestamp t_ref, Timestamp tau_vis, Resolution res) {
  if (tau_vis == 0) throw std::invalid_argument("tau_vis must be positive");
  std::vector<std::int64_t> last(res.pixel_count(), -1);
  for (const Event& e : events) {
    if (!res.contains(e.x, e.y)) throw RangeError("event outside sensor");
    if (e.t > t_ref) throw RangeError("event at t=" + std::to_string(e.t) + " after t_ref=" + std::to_string(t_ref));
    auto& slot = last[std::size_t{e.y} * res.width + e.x];
    slot = std::max<std::int64_t>(slot, static_cast<std::int64_t>(e.t));
  }
  TimeSurface ts{res, t_ref, tau_vis, std::vector<std::uint8_t>(res.pixel_count(), 0)};
  for (std::size_t i = 0; i < last.size(); ++i) {
    if (last[i] < 0) continue;
    const double age = static_cast<double>(t_ref - static_cast<Timestamp>(last[i]));
    ts.intensity[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::exp(-age / static_cast<double>(tau_vis))));
  }
  return ts;
}

inline void invert(TimeSurface& ts) {
  for (auto& v : ts.intensity) v = static_cast<std::uint8_t>(255 - v);
}

struct RgbImage {
  Resolution resolution;
  std::vector<std::array<std::uint8_t, 3>> pixels;

  const std::array<std::uint8_t, 3>& at(std::uint32_t x, std::uint32_t y) const {
    return pixels[std::size_t{y} * resolution.width + x];
  }
};

inline constexpr std::array<std::uint8_t, 3> kTrajectoryColour{255, 0, 0};

/// Grey base promoted to RGB with every trajectory pixel painted red.
inline RgbImage overlay_trajectory(const TimeSurface& ts, std::span<const FocusSample> trajectory) {
  RgbImage img{ts.resolution, {}};
  img.pixels.reserve(ts.intensity.size());
  for (std::uint8_t v : ts.intensity) img.pixels.push_back({v, v, v});
  for (const FocusSample& s : trajectory) {
    if (!ts.resolution.contains(s.cx, s.cy))
      throw RangeError("trajectory sample (" + std::to_string(s.cx) + "," + std::to_string(s.cy) + ") outside image");
    img.pixels[std::size_t{s.cy} * ts.resolution.width + s.cx] = kTrajectoryColour;
  }
  return img;
}

inline void write_pgm(const TimeSurface& ts, std::ostream& out) {
  out << "P5\n" << ts.resolution.width << ' ' << ts.resolution.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(ts.intensity.data()), static_cast<std::streamsize>(ts.intensity.size()));
  if (!out) throw std::runtime_error("failed writing PGM");
}

inline void write_ppm(const RgbImage& img, std::ostream& out) {
  out << "P6\n" << img.resolution.width << ' ' << img.resolution.height << "\n255\n";
  for (const auto& px : img.pixels) out.write(reinterpret_cast<const char*>(px.data()), 3);
  if (!out) throw std::runtime_error("failed writing PPM");
}

}  // namespace foveal
