#pragma once

// Q12.8 pixel-state arithmetic and the piecewise-linear decay factor used by
// the saliency engine. Everything here is constexpr-friendly and pure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace foveal {

/// Signed Q12.8 value held in a 21-bit two's complement word.
///
/// Representable range is [-4096.0, 4095.99609375]. Every arithmetic helper
/// below saturates at the bounds instead of wrapping.
class Fixed {
 public:
  static constexpr int kFracBits = 8;
  static constexpr int kWordBits = 21;
  static constexpr std::int32_t kRawMax = (1 << (kWordBits - 1)) - 1;
  static constexpr std::int32_t kRawMin = -(1 << (kWordBits - 1));
  static constexpr std::int32_t kOne = 1 << kFracBits;

  constexpr Fixed() = default;

  /// Clamps `raw` into the 21-bit range.
  static constexpr Fixed from_raw(std::int64_t raw) {
    Fixed f;
    f.raw_ = static_cast<std::int32_t>(std::clamp<std::int64_t>(raw, kRawMin, kRawMax));
    return f;
  }

  /// Nearest representable value, ties rounded away from zero; saturating.
  static Fixed from_real(double v) {
    if (std::isnan(v)) return Fixed{};
    const double scaled = std::round(v * kOne);
    if (scaled >= static_cast<double>(kRawMax)) return max();
    if (scaled <= static_cast<double>(kRawMin)) return min();
    return from_raw(static_cast<std::int64_t>(scaled));
  }

  static constexpr Fixed max() { return from_raw(kRawMax); }
  static constexpr Fixed min() { return from_raw(kRawMin); }
  static constexpr Fixed one() { return from_raw(kOne); }
  static constexpr Fixed zero() { return Fixed{}; }

  constexpr std::int32_t raw() const { return raw_; }
  constexpr double to_real() const { return static_cast<double>(raw_) / kOne; }

  constexpr Fixed operator-() const { return from_raw(-static_cast<std::int64_t>(raw_)); }

  friend constexpr auto operator<=>(Fixed, Fixed) = default;

 private:
  std::int32_t raw_ = 0;
};

constexpr Fixed fixed_add_sat(Fixed a, Fixed b) {
  return Fixed::from_raw(static_cast<std::int64_t>(a.raw()) + b.raw());
}

/// Unsigned Q0.16 multiplier in [0, 1]; 1.0 is exactly 2^16.
class DecayFactor {
 public:
  static constexpr int kFracBits = 16;
  static constexpr std::uint32_t kOne = 1u << kFracBits;

  constexpr DecayFactor() = default;

  static constexpr DecayFactor from_raw(std::uint32_t raw) {
    DecayFactor d;
    d.raw_ = std::min(raw, kOne);
    return d;
  }
  static constexpr DecayFactor one() { return from_raw(kOne); }
  static constexpr DecayFactor zero() { return DecayFactor{}; }

  /// Nearest raw value to `v`, clamped into [0, 1].
  static DecayFactor from_real(double v) {
    if (!(v > 0.0)) return zero();
    if (v >= 1.0) return one();
    return from_raw(static_cast<std::uint32_t>(std::lround(v * kOne)));
  }

  constexpr std::uint32_t raw() const { return raw_; }
  constexpr double to_real() const { return static_cast<double>(raw_) / kOne; }

  friend constexpr auto operator<=>(DecayFactor, DecayFactor) = default;

 private:
  std::uint32_t raw_ = 0;
};

/// a * f, truncated toward zero. |f| <= 1 so the result never leaves range.
constexpr Fixed fixed_mul(Fixed a, DecayFactor f) {
  const std::int64_t product = static_cast<std::int64_t>(a.raw()) * f.raw();
  return Fixed::from_raw(product / static_cast<std::int64_t>(DecayFactor::kOne));
}

/// Piecewise-linear approximation of exp(-x) over x in [0, domain_cutoff].
///
/// Breakpoints are spaced uniformly in exp(-x/2), which equalises the chord
/// error across segments (chord error ~ h^2 e^{-x} / 8). Knot values are the
/// true exponential rounded to Q0.16, except the last knot which is exactly 0.
/// Beyond the cutoff the factor is exactly 0.
///
/// Inputs are normalised to x = dt / tau in Q16.16 before lookup. Each segment
/// stores its start, intercept (value at start) and a floor-rounded slope, so
/// the table is non-increasing both within and across segments.
class PwlTable {
 public:
  static constexpr int kInputFracBits = 16;
  static constexpr int kSlopeFracBits = 16;
  static constexpr double kMaxCutoff = 1024.0;

  struct Segment {
    std::uint64_t x_start;   // Q16.16
    std::uint32_t intercept; // Q0.16, value at x_start
    std::uint64_t slope;     // |dy/dx| in Q0.16 per Q16.16 input, scaled by 2^16
  };

  PwlTable() : PwlTable(16, 8.0) {}

  PwlTable(int segment_count, double domain_cutoff)
      : segment_count_(segment_count), domain_cutoff_(domain_cutoff) {
    if (segment_count < 1) throw std::invalid_argument("pwl.segment_count must be >= 1");
    if (!(domain_cutoff > 0.0) || domain_cutoff > kMaxCutoff)
      throw std::invalid_argument("pwl.domain_cutoff must be in (0, 1024]");

    cutoff_raw_ = static_cast<std::uint64_t>(std::llround(domain_cutoff * (1 << kInputFracBits)));
    const double span = 1.0 - std::exp(-domain_cutoff / 2.0);

    std::vector<std::uint64_t> knots_x(segment_count + 1);
    std::vector<std::uint32_t> knots_y(segment_count + 1);
    for (int k = 0; k <= segment_count; ++k) {
      if (k == segment_count) {
        knots_x[k] = cutoff_raw_;
        knots_y[k] = 0;
        continue;
      }
      const double x = -2.0 * std::log(1.0 - span * k / segment_count);
      knots_x[k] = static_cast<std::uint64_t>(std::llround(x * (1 << kInputFracBits)));
      knots_y[k] = k == 0 ? DecayFactor::kOne : static_cast<std::uint32_t>(std::lround(std::exp(-x) * DecayFactor::kOne));
    }

    segments_.reserve(segment_count);
    for (int k = 0; k < segment_count; ++k) {
      const std::uint64_t width = knots_x[k + 1] - knots_x[k];
      const std::uint64_t drop = knots_y[k] - knots_y[k + 1];
      // floor keeps the segment end at or above the next knot
      const std::uint64_t slope = width == 0 ? 0 : (drop << kSlopeFracBits) / width;
      segments_.push_back({knots_x[k], knots_y[k], slope});
    }
  }

  int segment_count() const { return segment_count_; }
  double domain_cutoff() const { return domain_cutoff_; }
  std::uint64_t cutoff_raw() const { return cutoff_raw_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Evaluates the table at a Q16.16 normalised input.
  DecayFactor evaluate(std::uint64_t x_raw) const {
    if (x_raw >= cutoff_raw_) return DecayFactor::zero();
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x_raw,
                               [](std::uint64_t x, const Segment& s) { return x < s.x_start; });
    const Segment& seg = *std::prev(it);
    const std::uint64_t dx = x_raw - seg.x_start;
    const std::uint64_t fall = (seg.slope * dx) >> kSlopeFracBits;
    return DecayFactor::from_raw(fall >= seg.intercept ? 0u : static_cast<std::uint32_t>(seg.intercept - fall));
  }

  friend bool operator==(const PwlTable& a, const PwlTable& b) {
    return a.segment_count_ == b.segment_count_ && a.cutoff_raw_ == b.cutoff_raw_;
  }

 private:
  int segment_count_;
  double domain_cutoff_;
  std::uint64_t cutoff_raw_ = 0;
  std::vector<Segment> segments_;
};

/// Approximates exp(-delta_t / tau). Times are in microseconds.
inline DecayFactor pwl_exp_decay(std::uint64_t delta_t, std::uint64_t tau, const PwlTable& table) {
  if (tau == 0) throw std::invalid_argument("tau must be positive");
  if (delta_t == 0) return DecayFactor::one();
  using u128 = unsigned __int128;
  const u128 scaled = static_cast<u128>(delta_t) << PwlTable::kInputFracBits;
  if (scaled >= static_cast<u128>(table.cutoff_raw()) * tau) return DecayFactor::zero();
  return table.evaluate(static_cast<std::uint64_t>(scaled / tau));
}

}  // namespace foveal
