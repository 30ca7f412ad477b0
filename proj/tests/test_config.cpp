#include <gtest/gtest.h>

#include <sstream>

#include "foveal/config.hpp"

using namespace foveal;

namespace {

KeyValueFile kv(const std::string& text) {
  std::istringstream in(text);
  return KeyValueFile::parse(in);
}

RunConfig run_config(const std::string& extra) {
  return RunConfig::from_file(kv("input.path = in.csv\noutput.dir = out\ntau = 10000\n" + extra), "/base");
}

std::string error_of(const std::string& text) {
  try {
    RunConfig::from_file(kv(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(KeyValueFile, ParsesCommentsAndWhitespace) {
  const auto f = kv("# comment\n\n  a = 1 \nb=two words\n");
  ASSERT_EQ(f.entries.size(), 2u);
  EXPECT_EQ(f.entries[0], (std::pair<std::string, std::string>{"a", "1"}));
  EXPECT_EQ(f.entries[1].second, "two words");
  EXPECT_THROW(kv("novalue\n"), ConfigError);
  EXPECT_THROW(kv(" = 3\n"), ConfigError);
}

TEST(RunConfig, DefaultsAndPathResolution) {
  const RunConfig c = run_config("");
  EXPECT_EQ(c.input_path, std::filesystem::path("/base/in.csv"));
  EXPECT_EQ(c.output_dir, std::filesystem::path("/base/out"));
  EXPECT_EQ(c.attention.tau, 10'000u);
  EXPECT_EQ(c.attention.foa.mx, 16u);
  EXPECT_EQ(c.attention.resolution.width, 240u);
  EXPECT_EQ(c.topdown.mode, TopDownMode::Off);
  EXPECT_EQ(c.topdown.roi.x1, 239u);
  EXPECT_EQ(c.topdown.roi.y1, 179u);
  EXPECT_EQ(c.input_format, InputFormat::Csv);
}

TEST(RunConfig, ParsesEveryKey) {
  const RunConfig c = run_config(
      "input.format = raw\ninput.x_shift = 1\ninput.x_mask = 0x7F\ninput.y_shift = 8\ninput.y_mask = 127\n"
      "input.pol_shift = 0\nresolution.width = 128\nresolution.height = 128\ns_plus = 0.5\ns_minus = 0.75\n"
      "foa = [8, 12]\npwl.segment_count = 32\npwl.domain_cutoff = 10\ntopdown.mode = modulation\n"
      "topdown.roi = [0, 0, 63, 127]\ntopdown.gain_inside = 1\ntopdown.gain_outside = 0.5\n"
      "pipeline.word_order = xy\nseed = 42\n");
  EXPECT_EQ(c.input_format, InputFormat::Raw);
  EXPECT_EQ(c.decode.x_mask, 0x7Fu);
  EXPECT_EQ(c.decode.y_shift, 8u);
  EXPECT_EQ(c.attention.resolution.height, 128u);
  EXPECT_DOUBLE_EQ(c.attention.s_minus.to_real(), 0.75);
  EXPECT_EQ(c.attention.foa.my, 12u);
  EXPECT_EQ(c.attention.pwl.segment_count(), 32);
  EXPECT_EQ(c.topdown.mode, TopDownMode::Modulation);
  EXPECT_EQ(c.topdown.roi.x1, 63u);
  EXPECT_DOUBLE_EQ(c.topdown.gain_outside.to_real(), 0.5);
  EXPECT_EQ(c.pipeline.word_order, WordOrder::XThenY);
  EXPECT_EQ(c.seed, 42u);
}

TEST(RunConfig, Errors) {
  EXPECT_NE(error_of("input.path = a\noutput.dir = b\n").find("missing required key 'tau'"), std::string::npos);
  EXPECT_NE(error_of("input.path = a\noutput.dir = b\ntau = 5\ntua = 4\n").find("unknown key 'tua'"), std::string::npos);
  EXPECT_NE(error_of("input.path = a\noutput.dir = b\ntau = 5\ntau = 6\n").find("duplicate key 'tau'"), std::string::npos);
  EXPECT_FALSE(error_of("input.path = a\noutput.dir = b\ntau = 0\n").empty());
  EXPECT_FALSE(error_of("input.path = a\noutput.dir = b\ntau = ten\n").empty());
  EXPECT_FALSE(error_of("input.path = a\noutput.dir = b\ntau = 5\nfoa = [8]\n").empty());
  EXPECT_FALSE(error_of("input.path = a\noutput.dir = b\ntau = 5\ntopdown.roi = [0, 0, 300, 10]\n").empty());
  EXPECT_FALSE(error_of("input.path = a\noutput.dir = b\ntau = 5\ntopdown.mode = sideways\n").empty());
  EXPECT_FALSE(error_of("input.path = a\noutput.dir = b\ntau = 5\npwl.segment_count = 0\n").empty());
  EXPECT_FALSE(error_of("input.path = a\noutput.dir = b\ntau = 5\npipeline.word_order = zz\n").empty());
}

TEST(RunConfig, EchoReparsesToSameConfig) {
  const RunConfig c = run_config("s_plus = 0.3\nfoa = [6, 10]\ntopdown.mode = gating\ntopdown.roi = [1, 2, 30, 40]\n"
                                 "pwl.domain_cutoff = 9.5\nseed = 7\n");
  const std::string text = c.to_text();
  const RunConfig again = RunConfig::from_file(kv(text));
  EXPECT_EQ(again.to_text(), text);
  EXPECT_EQ(again.attention.s_plus, c.attention.s_plus);
  EXPECT_EQ(again.attention.pwl, c.attention.pwl);
}

TEST(Stimulus, ParsesSources) {
  const StimulusSpec s = parse_stimulus(kv("duration_us = 300000\nseed = 3\nnoise_rate_hz = 10\n"
                                           "source = 60, 90, 1000, 0, 100000\nsource = 120, 90, 500, 0, 200000, -1\n"));
  EXPECT_EQ(s.duration, 300'000u);
  EXPECT_EQ(s.seed, 3u);
  ASSERT_EQ(s.sources.size(), 2u);
  EXPECT_EQ(s.sources[0].x, 60u);
  EXPECT_EQ(s.sources[0].polarity, Polarity::On);
  EXPECT_EQ(s.sources[1].polarity, Polarity::Off);
  EXPECT_DOUBLE_EQ(s.sources[1].rate_hz, 500.0);
  EXPECT_THROW(parse_stimulus(kv("source = 1, 1, 10, 0, 5\n")), ConfigError);
  EXPECT_THROW(parse_stimulus(kv("duration_us = 10\nsource = 1, 1, 10\n")), ConfigError);
  EXPECT_THROW(parse_stimulus(kv("duration_us = 10\nsource = 1, 1, 10, 0, 5, 0\n")), ConfigError);
  EXPECT_THROW(parse_stimulus(kv("duration_us = 10\nbogus = 1\n")), ConfigError);
}
