#pragma once

// Address-event data model plus CSV / raw AER ingestion and synthetic stimuli.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "foveal/errors.hpp"

namespace foveal {

using Timestamp = std::uint64_t;  // microseconds

enum class Polarity : std::int8_t { Off = -1, On = 1 };

struct Pixel {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  friend constexpr bool operator==(Pixel, Pixel) = default;
};

struct Resolution {
  std::uint32_t width = 240;
  std::uint32_t height = 180;

  constexpr bool contains(std::uint32_t x, std::uint32_t y) const { return x < width && y < height; }
  constexpr bool contains(Pixel p) const { return contains(p.x, p.y); }
  constexpr std::size_t pixel_count() const { return std::size_t{width} * height; }
  friend constexpr bool operator==(Resolution, Resolution) = default;
};

struct Event {
  Timestamp t = 0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  Polarity p = Polarity::On;

  constexpr Pixel pixel() const { return {x, y}; }
  friend constexpr bool operator==(const Event&, const Event&) = default;
};

namespace detail {

template <class T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty() || s.front() == '+' || s.front() == '-') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Reads `t_us,x,y,p` records. `#` lines and blank lines are skipped.
inline std::vector<Event> read_csv_stream(std::istream& in, Resolution res) {
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;

    std::string_view fields[4];
    std::size_t n = 0;
    while (true) {
      const auto comma = view.find(',');
      if (n == 4) throw ParseError(line_no, "expected 4 fields");
      fields[n++] = detail::trim(view.substr(0, comma));
      if (comma == std::string_view::npos) break;
      view.remove_prefix(comma + 1);
    }
    if (n != 4) throw ParseError(line_no, "expected 4 fields");

    Event e;
    if (!detail::parse_uint(fields[0], e.t)) throw ParseError(line_no, "bad timestamp");
    if (!detail::parse_uint(fields[1], e.x)) throw ParseError(line_no, "bad x coordinate");
    if (!detail::parse_uint(fields[2], e.y)) throw ParseError(line_no, "bad y coordinate");
    if (fields[3] == "1") {
      e.p = Polarity::On;
    } else if (fields[3] == "-1") {
      e.p = Polarity::Off;
    } else {
      throw ParseError(line_no, "polarity must be 1 or -1");
    }
    if (!res.contains(e.x, e.y))
      throw RangeError("line " + std::to_string(line_no) + ": coordinate (" + std::to_string(e.x) + "," +
                       std::to_string(e.y) + ") outside sensor");
    if (!events.empty() && e.t < events.back().t)
      throw OrderingError("line " + std::to_string(line_no) + ": timestamp " + std::to_string(e.t) +
                          " precedes " + std::to_string(events.back().t));
    events.push_back(e);
  }
  return events;
}

inline void write_csv_stream(const std::vector<Event>& events, std::ostream& out) {
  for (const Event& e : events) out << e.t << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.p) << '\n';
  if (!out) throw std::runtime_error("failed writing event stream");
}

/// Bit fields of a 32-bit raw address word. Defaults follow the jAER DAVIS240
/// layout: y in bits 22..30, x in bits 12..21, polarity in bit 11.
struct AddressDecode {
  unsigned x_shift = 12;
  std::uint32_t x_mask = 0x3FF;
  unsigned y_shift = 22;
  std::uint32_t y_mask = 0x1FF;
  unsigned pol_shift = 11;

  std::uint32_t x(std::uint32_t addr) const { return (addr >> x_shift) & x_mask; }
  std::uint32_t y(std::uint32_t addr) const { return (addr >> y_shift) & y_mask; }
  Polarity polarity(std::uint32_t addr) const { return ((addr >> pol_shift) & 1u) ? Polarity::On : Polarity::Off; }

  std::uint32_t encode(std::uint32_t xv, std::uint32_t yv, Polarity p) const {
    return ((xv & x_mask) << x_shift) | ((yv & y_mask) << y_shift) |
           (p == Polarity::On ? (1u << pol_shift) : 0u);
  }
};

/// Reads `#` header lines followed by 8-byte big-endian (address, timestamp)
/// records. 32-bit timestamps are unwrapped to 64 bits: a backward jump of
/// more than 2^31 us is treated as a wrap.
inline std::vector<Event> read_raw_aer_stream(std::istream& in, Resolution res, const AddressDecode& decode = {}) {
  std::uint64_t offset = 0;
  std::string header;
  while (in.peek() == '#') {
    std::getline(in, header);
    offset += header.size() + (in.eof() ? 0 : 1);
  }

  std::vector<Event> events;
  std::uint64_t epoch = 0;
  std::uint32_t prev_raw = 0;
  bool first = true;
  unsigned char rec[8];
  while (true) {
    in.read(reinterpret_cast<char*>(rec), sizeof rec);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got != sizeof rec) throw FormatError(offset, "truncated record (" + std::to_string(got) + " bytes)");

    const std::uint32_t addr = (std::uint32_t{rec[0]} << 24) | (std::uint32_t{rec[1]} << 16) |
                               (std::uint32_t{rec[2]} << 8) | std::uint32_t{rec[3]};
    const std::uint32_t ts = (std::uint32_t{rec[4]} << 24) | (std::uint32_t{rec[5]} << 16) |
                             (std::uint32_t{rec[6]} << 8) | std::uint32_t{rec[7]};
    if (!first && ts < prev_raw) {
      if (prev_raw - ts > (1u << 31)) {
        epoch += std::uint64_t{1} << 32;
      } else {
        throw OrderingError("offset " + std::to_string(offset) + ": timestamp " + std::to_string(ts) +
                            " precedes " + std::to_string(prev_raw));
      }
    }
    first = false;
    prev_raw = ts;

    Event e{epoch + ts, decode.x(addr), decode.y(addr), decode.polarity(addr)};
    if (!res.contains(e.x, e.y))
      throw RangeError("offset " + std::to_string(offset) + ": coordinate (" + std::to_string(e.x) + "," +
                       std::to_string(e.y) + ") outside sensor");
    events.push_back(e);
    offset += sizeof rec;
  }
  return events;
}

/// Inverse of read_raw_aer_stream for streams spanning less than 2^32 us.
inline void write_raw_aer_stream(const std::vector<Event>& events, std::ostream& out, const AddressDecode& decode = {}) {
  out << "#!AER-DAT2.0\n";
  for (const Event& e : events) {
    const std::uint32_t addr = decode.encode(e.x, e.y, e.p);
    const auto ts = static_cast<std::uint32_t>(e.t);
    const unsigned char rec[8] = {
        static_cast<unsigned char>(addr >> 24), static_cast<unsigned char>(addr >> 16),
        static_cast<unsigned char>(addr >> 8),  static_cast<unsigned char>(addr),
        static_cast<unsigned char>(ts >> 24),   static_cast<unsigned char>(ts >> 16),
        static_cast<unsigned char>(ts >> 8),    static_cast<unsigned char>(ts)};
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
}

// ---------------------------------------------------------------------------
// Synthetic stimuli

struct PointSource {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  double rate_hz = 0.0;
  Timestamp start = 0;
  Timestamp stop = 0;
  Polarity polarity = Polarity::On;
};

struct StimulusSpec {
  Resolution resolution;
  std::vector<PointSource> sources;
  double noise_rate_hz = 0.0;
  Timestamp duration = 0;  // events satisfy t < duration
  std::uint64_t seed = 0;

  void validate() const {
    if (resolution.width == 0 || resolution.height == 0) throw ConfigError("resolution must be positive");
    if (!(noise_rate_hz >= 0.0) || !std::isfinite(noise_rate_hz)) throw ConfigError("noise rate must be >= 0");
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const PointSource& s = sources[i];
      const std::string tag = "source " + std::to_string(i) + ": ";
      if (!(s.rate_hz >= 0.0) || s.rate_hz > 1e6) throw ConfigError(tag + "rate must be in [0, 1e6] Hz");
      if (s.stop < s.start) throw ConfigError(tag + "stop precedes start");
      if (!resolution.contains(s.x, s.y)) throw ConfigError(tag + "coordinate outside resolution");
    }
  }
};

/// Point sources fire every round(1e6 / rate) us over [start, stop]; noise is
/// Poisson in time and uniform over pixels. Output is sorted by time with ties
/// in source declaration order (noise last).
inline std::vector<Event> generate_stimulus(const StimulusSpec& spec) {
  spec.validate();
  struct Tagged {
    Event e;
    std::size_t source;
  };
  std::vector<Tagged> all;

  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const PointSource& s = spec.sources[i];
    if (s.rate_hz <= 0.0) continue;
    const auto period = static_cast<Timestamp>(std::llround(1e6 / s.rate_hz));
    for (Timestamp t = s.start; t <= s.stop && t < spec.duration; t += period)
      all.push_back({{t, s.x, s.y, s.polarity}, i});
  }

  if (spec.noise_rate_hz > 0.0 && spec.duration > 0) {
    std::mt19937_64 rng(spec.seed);
    const auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const double mean_gap_us = 1e6 / spec.noise_rate_hz;
    const std::size_t noise_tag = spec.sources.size();
    double t = 0.0;
    while (true) {
      t += -std::log1p(-uniform01()) * mean_gap_us;
      if (t >= static_cast<double>(spec.duration)) break;
      const std::uint64_t idx = rng() % spec.resolution.pixel_count();
      const Polarity pol = (rng() & 1u) ? Polarity::On : Polarity::Off;
      all.push_back({{static_cast<Timestamp>(t), static_cast<std::uint32_t>(idx % spec.resolution.width),
                      static_cast<std::uint32_t>(idx / spec.resolution.width), pol},
                     noise_tag});
    }
  }

  std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.e.t != b.e.t ? a.e.t < b.e.t : a.source < b.source;
  });
  std::vector<Event> out;
  out.reserve(all.size());
  for (const Tagged& tg : all) out.push_back(tg.e);
  return out;
}

}  // namespace foveal
