#pragma once

// Flat `key = value` configuration files for runs and synthetic stimuli.
//
//   # comment
//   tau = 10000
//   topdown.roi = [0, 0, 239, 89]
//
// Unknown and duplicate keys are rejected. `source` is the only key that may
// repeat (stimulus files), and its occurrences keep declaration order.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "foveal/errors.hpp"
#include "foveal/events.hpp"
#include "foveal/pipeline.hpp"
#include "foveal/saliency.hpp"
#include "foveal/topdown.hpp"

namespace foveal {

struct KeyValueFile {
  std::vector<std::pair<std::string, std::string>> entries;

  static KeyValueFile parse(std::istream& in) {
    KeyValueFile f;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view v = detail::trim(line);
      if (v.empty() || v.front() == '#') continue;
      const auto eq = v.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key(detail::trim(v.substr(0, eq)));
      if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      f.entries.emplace_back(key, std::string(detail::trim(v.substr(eq + 1))));
    }
    return f;
  }

  static KeyValueFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse(in);
  }
};

namespace config_detail {

inline double to_double(const std::string& key, std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("key '" + key + "': expected a number, got '" + std::string(s) + "'");
  return v;
}

template <class T>
T to_uint(const std::string& key, std::string_view s) {
  std::string_view body = s;
  int base = 10;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    body.remove_prefix(2);
    base = 16;
  }
  T v{};
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v, base);
  if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size())
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> to_list(const std::string& key, std::string_view s, std::size_t n) {
  s = detail::trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string_view> parts;
  while (true) {
    const auto comma = s.find(',');
    parts.push_back(detail::trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (n != 0 && parts.size() != n)
    throw ConfigError("key '" + key + "': expected " + std::to_string(n) + " comma-separated values");
  return parts;
}

inline Fixed to_fixed(const std::string& key, std::string_view s) { return Fixed::from_real(to_double(key, s)); }

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Key lookup that remembers which keys were consumed.
class Reader {
 public:
  explicit Reader(const KeyValueFile& f, std::vector<std::string> repeatable = {}) {
    for (const auto& [k, v] : f.entries) {
      const bool repeats = std::find(repeatable.begin(), repeatable.end(), k) != repeatable.end();
      if (!repeats && values_.count(k)) throw ConfigError("duplicate key '" + k + "'");
      values_.emplace(k, v);
    }
  }

  const std::string* find(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.push_back(key);
    return &it->second;
  }

  const std::string& require(const std::string& key) {
    const std::string* v = find(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
  }

  std::vector<std::string> all(const std::string& key) {
    std::vector<std::string> out;
    auto [lo, hi] = values_.equal_range(key);
    for (auto it = lo; it != hi; ++it) out.push_back(it->second);
    used_.push_back(key);
    return out;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : values_)
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) throw ConfigError("unknown key '" + k + "'");
  }

 private:
  std::multimap<std::string, std::string> values_;
  std::vector<std::string> used_;
};

}  // namespace config_detail

enum class InputFormat { Csv, Raw };

struct RunConfig {
  std::filesystem::path input_path;
  InputFormat input_format = InputFormat::Csv;
  AddressDecode decode;
  AttentionConfig attention;
  TopDownConfig topdown;
  PipelineOptions pipeline;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  /// Relative paths are resolved against `base_dir`.
  static RunConfig from_file(const KeyValueFile& f, const std::filesystem::path& base_dir = {}) {
    using namespace config_detail;
    Reader r(f);
    RunConfig c;

    const auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      return path.lexically_normal();
    };

    c.input_path = resolve(r.require("input.path"));
    c.output_dir = resolve(r.require("output.dir"));
    if (auto v = r.find("input.format")) {
      if (*v == "csv") c.input_format = InputFormat::Csv;
      else if (*v == "raw") c.input_format = InputFormat::Raw;
      else throw ConfigError("key 'input.format': expected csv or raw");
    }
    if (auto v = r.find("input.x_shift")) c.decode.x_shift = to_uint<unsigned>("input.x_shift", *v);
    if (auto v = r.find("input.x_mask")) c.decode.x_mask = to_uint<std::uint32_t>("input.x_mask", *v);
    if (auto v = r.find("input.y_shift")) c.decode.y_shift = to_uint<unsigned>("input.y_shift", *v);
    if (auto v = r.find("input.y_mask")) c.decode.y_mask = to_uint<std::uint32_t>("input.y_mask", *v);
    if (auto v = r.find("input.pol_shift")) c.decode.pol_shift = to_uint<unsigned>("input.pol_shift", *v);
    for (unsigned s : {c.decode.x_shift, c.decode.y_shift, c.decode.pol_shift})
      if (s > 31) throw ConfigError("input bit shifts must be <= 31");

    AttentionConfig& a = c.attention;
    if (auto v = r.find("resolution.width")) a.resolution.width = to_uint<std::uint32_t>("resolution.width", *v);
    if (auto v = r.find("resolution.height")) a.resolution.height = to_uint<std::uint32_t>("resolution.height", *v);
    a.tau = to_uint<Timestamp>("tau", r.require("tau"));
    if (auto v = r.find("s_plus")) a.s_plus = to_fixed("s_plus", *v);
    if (auto v = r.find("s_minus")) a.s_minus = to_fixed("s_minus", *v);
    if (auto v = r.find("foa")) {
      auto parts = to_list("foa", *v, 2);
      a.foa = {to_uint<std::uint32_t>("foa", parts[0]), to_uint<std::uint32_t>("foa", parts[1])};
    }
    int segments = 16;
    double cutoff = 8.0;
    if (auto v = r.find("pwl.segment_count")) segments = to_uint<int>("pwl.segment_count", *v);
    if (auto v = r.find("pwl.domain_cutoff")) cutoff = to_double("pwl.domain_cutoff", *v);
    try {
      a.pwl = PwlTable(segments, cutoff);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }

    TopDownConfig& td = c.topdown;
    td.roi = RegionOfInterest::full(a.resolution);
    if (auto v = r.find("topdown.mode")) {
      auto m = parse_topdown_mode(*v);
      if (!m) throw ConfigError("key 'topdown.mode': expected off, gating or modulation");
      td.mode = *m;
    }
    if (auto v = r.find("topdown.roi")) {
      auto p = to_list("topdown.roi", *v, 4);
      td.roi = {to_uint<std::uint32_t>("topdown.roi", p[0]), to_uint<std::uint32_t>("topdown.roi", p[1]),
                to_uint<std::uint32_t>("topdown.roi", p[2]), to_uint<std::uint32_t>("topdown.roi", p[3])};
    }
    if (auto v = r.find("topdown.gain_inside")) td.gain_inside = to_fixed("topdown.gain_inside", *v);
    if (auto v = r.find("topdown.gain_outside")) td.gain_outside = to_fixed("topdown.gain_outside", *v);

    if (auto v = r.find("pipeline.word_order")) {
      if (*v == "yx") c.pipeline.word_order = WordOrder::YThenX;
      else if (*v == "xy") c.pipeline.word_order = WordOrder::XThenY;
      else throw ConfigError("key 'pipeline.word_order': expected yx or xy");
    }
    if (auto v = r.find("seed")) c.seed = to_uint<std::uint64_t>("seed", *v);

    r.reject_unknown();
    a.validate();
    td.validate(a.resolution);
    return c;
  }

  /// Every key with its effective value; parsing the result yields an equal config.
  std::string to_text() const {
    using config_detail::format_double;
    const AttentionConfig& a = attention;
    std::ostringstream o;
    o << "input.path = " << input_path.string() << '\n'
      << "input.format = " << (input_format == InputFormat::Csv ? "csv" : "raw") << '\n'
      << "input.x_shift = " << decode.x_shift << '\n'
      << "input.x_mask = " << decode.x_mask << '\n'
      << "input.y_shift = " << decode.y_shift << '\n'
      << "input.y_mask = " << decode.y_mask << '\n'
      << "input.pol_shift = " << decode.pol_shift << '\n'
      << "resolution.width = " << a.resolution.width << '\n'
      << "resolution.height = " << a.resolution.height << '\n'
      << "tau = " << a.tau << '\n'
      << "s_plus = " << format_double(a.s_plus.to_real()) << '\n'
      << "s_minus = " << format_double(a.s_minus.to_real()) << '\n'
      << "foa = [" << a.foa.mx << ", " << a.foa.my << "]\n"
      << "pwl.segment_count = " << a.pwl.segment_count() << '\n'
      << "pwl.domain_cutoff = " << format_double(a.pwl.domain_cutoff()) << '\n'
      << "topdown.mode = " << to_string(topdown.mode) << '\n'
      << "topdown.roi = [" << topdown.roi.x0 << ", " << topdown.roi.y0 << ", " << topdown.roi.x1 << ", "
      << topdown.roi.y1 << "]\n"
      << "topdown.gain_inside = " << format_double(topdown.gain_inside.to_real()) << '\n'
      << "topdown.gain_outside = " << format_double(topdown.gain_outside.to_real()) << '\n'
      << "pipeline.word_order = " << (pipeline.word_order == WordOrder::YThenX ? "yx" : "xy") << '\n'
      << "output.dir = " << output_dir.string() << '\n'
      << "seed = " << seed << '\n';
    return o.str();
  }
};

/// Stimulus file: resolution.*, duration_us, seed, noise_rate_hz and any
/// number of `source = x, y, rate_hz, start_us, stop_us[, polarity]`.
inline StimulusSpec parse_stimulus(const KeyValueFile& f) {
  using namespace config_detail;
  Reader r(f, {"source"});
  StimulusSpec s;
  if (auto v = r.find("resolution.width")) s.resolution.width = to_uint<std::uint32_t>("resolution.width", *v);
  if (auto v = r.find("resolution.height")) s.resolution.height = to_uint<std::uint32_t>("resolution.height", *v);
  s.duration = to_uint<Timestamp>("duration_us", r.require("duration_us"));
  if (auto v = r.find("seed")) s.seed = to_uint<std::uint64_t>("seed", *v);
  if (auto v = r.find("noise_rate_hz")) s.noise_rate_hz = to_double("noise_rate_hz", *v);
  for (const std::string& src : r.all("source")) {
    auto p = to_list("source", src, 0);
    if (p.size() != 5 && p.size() != 6) throw ConfigError("key 'source': expected x, y, rate_hz, start_us, stop_us[, polarity]");
    PointSource ps;
    ps.x = to_uint<std::uint32_t>("source", p[0]);
    ps.y = to_uint<std::uint32_t>("source", p[1]);
    ps.rate_hz = to_double("source", p[2]);
    ps.start = to_uint<Timestamp>("source", p[3]);
    ps.stop = to_uint<Timestamp>("source", p[4]);
    if (p.size() == 6) {
      if (p[5] == "1") ps.polarity = Polarity::On;
      else if (p[5] == "-1") ps.polarity = Polarity::Off;
      else throw ConfigError("key 'source': polarity must be 1 or -1");
    }
    s.sources.push_back(ps);
  }
  r.reject_unknown();
  s.validate();
  return s;
}

}  // namespace foveal
