#pragma once

// Event-driven saliency with lazy exponential decay, a lazily tracked winner
// and excite/inhibit inhibition of return over the focus-of-attention window.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "foveal/errors.hpp"
#include "foveal/events.hpp"
#include "foveal/fixed.hpp"

namespace foveal {

struct FoaSize {
  std::uint32_t mx = 16;
  std::uint32_t my = 16;
  friend constexpr bool operator==(FoaSize, FoaSize) = default;
};

struct AttentionConfig {
  Timestamp tau = 10'000;
  Fixed s_plus = Fixed::one();
  Fixed s_minus = Fixed::one();
  FoaSize foa;
  Resolution resolution;
  PwlTable pwl;

  void validate() const {
    if (resolution.width == 0 || resolution.height == 0) throw ConfigError("resolution must be positive");
    if (tau == 0) throw ConfigError("tau must be positive");
    if (s_plus < Fixed::zero()) throw ConfigError("s_plus must be >= 0");
    if (s_minus < Fixed::zero()) throw ConfigError("s_minus must be >= 0");
    if (foa.mx == 0 || foa.my == 0 || foa.mx % 2 || foa.my % 2)
      throw ConfigError("foa dimensions must be positive even integers");
    if (foa.mx > resolution.width || foa.my > resolution.height)
      throw ConfigError("foa must fit inside the sensor");
  }
};

struct FocusSample {
  Timestamp t = 0;
  std::uint32_t cx = 0;
  std::uint32_t cy = 0;
  friend constexpr bool operator==(const FocusSample&, const FocusSample&) = default;
};

/// Inclusive pixel rectangle.
struct PixelRect {
  std::uint32_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  constexpr bool contains(std::uint32_t x, std::uint32_t y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  constexpr bool contains(Pixel p) const { return contains(p.x, p.y); }
  friend constexpr bool operator==(PixelRect, PixelRect) = default;
};

/// Window of size m centred on `center`, with the centre at index m/2 inside
/// the window. Clamped (not shifted) at the sensor edges.
constexpr PixelRect foa_window(Pixel center, FoaSize foa, Resolution res) {
  const auto lo = [](std::uint32_t c, std::uint32_t half) { return c >= half ? c - half : 0u; };
  const auto hi = [](std::uint32_t c, std::uint32_t half, std::uint32_t extent) {
    return std::min<std::uint64_t>(std::uint64_t{c} + half - 1, extent - 1);
  };
  return {lo(center.x, foa.mx / 2), lo(center.y, foa.my / 2),
          static_cast<std::uint32_t>(hi(center.x, foa.mx / 2, res.width)),
          static_cast<std::uint32_t>(hi(center.y, foa.my / 2, res.height))};
}

/// Per-pixel storage: saliency value plus time of the pixel's last update.
template <class S>
concept PixelStore = requires(S s, const S cs, Pixel p, Fixed v, Timestamp t) {
  { cs.resolution() } -> std::same_as<Resolution>;
  { cs.value(p) } -> std::same_as<Fixed>;
  { cs.time(p) } -> std::same_as<Timestamp>;
  s.set_value(p, v);
  s.set_time(p, t);
};

/// Two dense row-major grids, the software counterpart of the state and
/// timestamp block RAMs. Zero-initialised.
class DenseStore {
 public:
  explicit DenseStore(Resolution res) : res_(res), values_(res.pixel_count()), times_(res.pixel_count(), 0) {}

  Resolution resolution() const { return res_; }
  Fixed value(Pixel p) const { return values_[index(p)]; }
  Timestamp time(Pixel p) const { return times_[index(p)]; }
  void set_value(Pixel p, Fixed v) { values_[index(p)] = v; }
  void set_time(Pixel p, Timestamp t) { times_[index(p)] = t; }

 private:
  std::size_t index(Pixel p) const { return std::size_t{p.y} * res_.width + p.x; }

  Resolution res_;
  std::vector<Fixed> values_;
  std::vector<Timestamp> times_;
};

template <PixelStore Store = DenseStore>
struct BasicSaliencyState {
  explicit BasicSaliencyState(Resolution res) : store(res) {}
  explicit BasicSaliencyState(Store s) : store(std::move(s)) {}

  Store store;
  std::optional<Pixel> winner;
  Fixed winner_state;  // winner's value as of its own last update
};

using SaliencyState = BasicSaliencyState<>;

/// s <- gain + s_old * decay(t - t_old); stores the new value and t.
template <PixelStore Store>
Fixed update_pixel_state(BasicSaliencyState<Store>& state, Pixel p, Timestamp t, Fixed gain, const AttentionConfig& cfg) {
  const Timestamp t_old = state.store.time(p);
  if (t < t_old)
    throw OrderingError("event at t=" + std::to_string(t) + " precedes pixel's last update at t=" + std::to_string(t_old));
  const Fixed s_old = state.store.value(p);
  const Fixed s_new = fixed_add_sat(gain, fixed_mul(s_old, pwl_exp_decay(t - t_old, cfg.tau, cfg.pwl)));
  state.store.set_value(p, s_new);
  state.store.set_time(p, t);
  if (state.winner == p) state.winner_state = s_new;
  return s_new;
}

/// Decays the winner to `t` without any increment and writes it back.
/// Returns nullopt when there is no winner yet.
template <PixelStore Store>
std::optional<Fixed> refresh_winner_state(BasicSaliencyState<Store>& state, Timestamp t, const AttentionConfig& cfg) {
  if (!state.winner) return std::nullopt;
  const Pixel w = *state.winner;
  const Timestamp t_old = state.store.time(w);
  if (t < t_old)
    throw OrderingError("refresh at t=" + std::to_string(t) + " precedes winner's last update at t=" + std::to_string(t_old));
  const Fixed s = fixed_mul(state.store.value(w), pwl_exp_decay(t - t_old, cfg.tau, cfg.pwl));
  state.store.set_value(w, s);
  state.store.set_time(w, t);
  state.winner_state = s;
  return s;
}

/// Excites the window around `new_winner` by s_plus, then inhibits the window
/// around `old_winner` by s_minus. Timestamps are left untouched.
template <PixelStore Store>
void apply_ior(BasicSaliencyState<Store>& state, std::optional<Pixel> old_winner, Pixel new_winner, const AttentionConfig& cfg) {
  const auto adjust = [&](Pixel center, Fixed delta) {
    if (delta == Fixed::zero()) return;
    const PixelRect r = foa_window(center, cfg.foa, cfg.resolution);
    for (std::uint32_t y = r.y0; y <= r.y1; ++y)
      for (std::uint32_t x = r.x0; x <= r.x1; ++x) state.store.set_value({x, y}, fixed_add_sat(state.store.value({x, y}), delta));
  };
  adjust(new_winner, cfg.s_plus);
  if (old_winner) adjust(*old_winner, -cfg.s_minus);
  if (state.winner) state.winner_state = state.store.value(*state.winner);
}

/// One event through the saliency block. Returns a focus sample when the
/// winner changes. Ties keep the incumbent.
template <PixelStore Store>
std::optional<FocusSample> process_event(BasicSaliencyState<Store>& state, const Event& e, Fixed gain, const AttentionConfig& cfg) {
  const Pixel p = e.pixel();
  const Fixed s = update_pixel_state(state, p, e.t, gain, cfg);
  if (state.winner == p) return std::nullopt;
  if (state.winner) {
    const Fixed incumbent = *refresh_winner_state(state, e.t, cfg);
    if (!(s > incumbent)) return std::nullopt;
  }
  const std::optional<Pixel> previous = state.winner;
  state.winner = p;
  apply_ior(state, previous, p, cfg);
  return FocusSample{e.t, p.x, p.y};
}

}  // namespace foveal
