#pragma once

// Reference model of the saliency block for verification only. It is written
// naively on purpose: dense double grids, windows found by scanning the whole
// sensor, and a brute-force global argmax. Nothing in the production pipeline
// includes this header.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "foveal/errors.hpp"
#include "foveal/events.hpp"
#include "foveal/fixed.hpp"
#include "foveal/saliency.hpp"

namespace foveal::oracle {

enum class Arithmetic {
  // True exponential, no rounding, no saturation.
  Exact,
  // Decay factors from the PWL table; products truncated toward zero onto the
  // 2^-8 grid; sums clamped to the Q12.8 range. Carried in doubles.
  Quantized,
};

struct FloatState {
  FloatState(Resolution r, Arithmetic a) : res(r), arithmetic(a), value(r.pixel_count(), 0.0), time(r.pixel_count(), 0) {}

  Resolution res;
  Arithmetic arithmetic;
  std::vector<double> value;
  std::vector<Timestamp> time;
  std::optional<Pixel> winner;

  std::size_t at(std::uint32_t x, std::uint32_t y) const { return std::size_t{y} * res.width + x; }
  double get(Pixel p) const { return value[at(p.x, p.y)]; }
};

namespace detail {

constexpr double kMaxState = 4095.99609375;
constexpr double kMinState = -4096.0;

inline double clamp_state(double v) { return v > kMaxState ? kMaxState : (v < kMinState ? kMinState : v); }

inline double decayed(const FloatState& s, double v, Timestamp dt, const AttentionConfig& cfg) {
  if (s.arithmetic == Arithmetic::Exact) return v * std::exp(-static_cast<double>(dt) / static_cast<double>(cfg.tau));
  const double f = pwl_exp_decay(dt, cfg.tau, cfg.pwl).to_real();
  return std::trunc(v * f * 256.0) / 256.0;
}

inline double add(const FloatState& s, double a, double b) {
  return s.arithmetic == Arithmetic::Exact ? a + b : clamp_state(a + b);
}

inline bool in_window(std::uint32_t x, std::uint32_t y, Pixel c, FoaSize foa) {
  const auto dx = static_cast<std::int64_t>(x) - c.x;
  const auto dy = static_cast<std::int64_t>(y) - c.y;
  const auto hx = static_cast<std::int64_t>(foa.mx / 2);
  const auto hy = static_cast<std::int64_t>(foa.my / 2);
  return dx >= -hx && dx < hx && dy >= -hy && dy < hy;
}

inline void adjust_window(FloatState& s, Pixel center, double delta, const AttentionConfig& cfg) {
  for (std::uint32_t y = 0; y < s.res.height; ++y)
    for (std::uint32_t x = 0; x < s.res.width; ++x)
      if (in_window(x, y, center, cfg.foa)) s.value[s.at(x, y)] = add(s, s.value[s.at(x, y)], delta);
}

}  // namespace detail

/// Value the event's pixel would take and the decayed winner value it would be
/// compared against, without mutating anything. `incumbent` is empty when no
/// comparison happens (no winner, or the event hits the winner).
struct Preview {
  double candidate = 0.0;
  std::optional<double> incumbent;
};

inline Preview preview_event(const FloatState& s, const Event& e, double gain, const AttentionConfig& cfg) {
  const std::size_t i = s.at(e.x, e.y);
  if (e.t < s.time[i]) throw OrderingError("oracle: event precedes pixel history");
  Preview pv;
  pv.candidate = detail::add(s, gain, detail::decayed(s, s.value[i], e.t - s.time[i], cfg));
  if (s.winner && !(*s.winner == e.pixel())) {
    const std::size_t w = s.at(s.winner->x, s.winner->y);
    pv.incumbent = detail::decayed(s, s.value[w], e.t - s.time[w], cfg);
  }
  return pv;
}

/// Replays one event: pixel update, winner refresh, strict comparison,
/// excitation of the new window then inhibition of the old one.
inline std::optional<FocusSample> reference_process_event(FloatState& s, const Event& e, double gain,
                                                          const AttentionConfig& cfg) {
  const Preview pv = preview_event(s, e, gain, cfg);
  const std::size_t i = s.at(e.x, e.y);
  s.value[i] = pv.candidate;
  s.time[i] = e.t;
  if (s.winner && *s.winner == e.pixel()) return std::nullopt;
  if (s.winner) {
    const std::size_t w = s.at(s.winner->x, s.winner->y);
    s.value[w] = *pv.incumbent;
    s.time[w] = e.t;
    if (!(pv.candidate > *pv.incumbent)) return std::nullopt;
  }
  const std::optional<Pixel> old = s.winner;
  s.winner = e.pixel();
  detail::adjust_window(s, e.pixel(), cfg.s_plus.to_real(), cfg);
  if (old) detail::adjust_window(s, *old, -cfg.s_minus.to_real(), cfg);
  return FocusSample{e.t, e.x, e.y};
}

/// Decays every pixel to `t` with the true exponential and returns the
/// maximum. Ties go to the smallest y, then the smallest x.
inline Pixel global_argmax(const FloatState& s, Timestamp t, Timestamp tau) {
  Pixel best{0, 0};
  double best_v = 0.0;
  bool have = false;
  for (std::uint32_t y = 0; y < s.res.height; ++y) {
    for (std::uint32_t x = 0; x < s.res.width; ++x) {
      const std::size_t i = s.at(x, y);
      const double age = t >= s.time[i] ? static_cast<double>(t - s.time[i]) : 0.0;
      const double v = s.value[i] * std::exp(-age / static_cast<double>(tau));
      if (!have || v > best_v) {
        best = {x, y};
        best_v = v;
        have = true;
      }
    }
  }
  return best;
}

}  // namespace foveal::oracle
