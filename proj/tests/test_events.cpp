#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "foveal/events.hpp"
#include "support/streams.hpp"

using namespace foveal;

namespace {

std::vector<Event> read_csv(const std::string& text, Resolution res = {}) {
  std::istringstream in(text);
  return read_csv_stream(in, res);
}

std::string raw_record(std::uint32_t addr, std::uint32_t ts) {
  std::string s;
  for (int shift = 24; shift >= 0; shift -= 8) s.push_back(static_cast<char>((addr >> shift) & 0xFF));
  for (int shift = 24; shift >= 0; shift -= 8) s.push_back(static_cast<char>((ts >> shift) & 0xFF));
  return s;
}

std::vector<Event> read_raw(const std::string& bytes, Resolution res = {}) {
  std::istringstream in(bytes, std::ios::binary);
  return read_raw_aer_stream(in, res);
}

}  // namespace

TEST(CsvReader, MapsFieldsDirectly) {
  const auto ev = read_csv("1000,10,20,1\n");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0], (Event{1000, 10, 20, Polarity::On}));
  EXPECT_EQ(read_csv("7,0,0,-1")[0].p, Polarity::Off);
}

TEST(CsvReader, RejectsZeroPolarity) {
  try {
    read_csv("1000,10,20,0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(CsvReader, RejectsDecreasingTimestamp) {
  try {
    read_csv("5,0,0,1\n4,0,0,1\n");
    FAIL() << "expected OrderingError";
  } catch (const OrderingError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(CsvReader, SkipsCommentsAndBlankLines) {
  const auto ev = read_csv("# t_us,x,y,p\n\n1,2,3,1\r\n# trailing\n2,2,3,-1\n");
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[1].t, 2u);
}

TEST(CsvReader, ReportsLineOfMalformedRecord) {
  for (const char* bad : {"1,2,3\n", "1,2,3,1,5\n", "a,2,3,1\n", "1,-2,3,1\n", "1,2,,1\n", "1,2,3,+1\n"}) {
    try {
      read_csv(std::string("# header\n") + bad);
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u) << bad;
    }
  }
}

TEST(CsvReader, RejectsOutOfRangeCoordinate) {
  EXPECT_THROW(read_csv("1,240,0,1\n"), RangeError);
  EXPECT_THROW(read_csv("1,0,180,1\n"), RangeError);
  EXPECT_NO_THROW(read_csv("1,239,179,1\n"));
  EXPECT_THROW(read_csv("1,4,0,1\n", {4, 4}), RangeError);
}

TEST(CsvWriter, EmitsInverseOfReader) {
  std::ostringstream out;
  write_csv_stream({{1000, 10, 20, Polarity::On}, {1001, 0, 1, Polarity::Off}}, out);
  EXPECT_EQ(out.str(), "1000,10,20,1\n1001,0,1,-1\n");

  std::ostringstream empty;
  write_csv_stream({}, empty);
  EXPECT_EQ(empty.str(), "");
}

TEST(CsvWriter, RoundTripPreservesRandomStreams) {
  test_support::Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const auto events = test_support::random_events(rng, {240, 180}, 1000, 5000, rng.below(1ull << 40));
    std::stringstream buf;
    write_csv_stream(events, buf);
    EXPECT_EQ(read_csv_stream(buf, {240, 180}), events);
  }
}

TEST(RawAerReader, DecodesConfiguredBitFields) {
  const AddressDecode dec;
  const std::uint32_t addr = (20u << 22) | (10u << 12) | (1u << 11);
  EXPECT_EQ(dec.encode(10, 20, Polarity::On), addr);
  const auto ev = read_raw("#!AER-DAT2.0\n# comment\n" + raw_record(addr, 1000));
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0], (Event{1000, 10, 20, Polarity::On}));
  EXPECT_EQ(read_raw(raw_record(addr & ~(1u << 11), 5))[0].p, Polarity::Off);
}

TEST(RawAerReader, CustomDecode) {
  const AddressDecode dec{1, 0x7F, 8, 0x7F, 0};  // DVS128-style layout
  std::istringstream in(raw_record((5u << 8) | (3u << 1) | 1u, 42), std::ios::binary);
  const auto ev = read_raw_aer_stream(in, {128, 128}, dec);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0], (Event{42, 3, 5, Polarity::On}));
}

TEST(RawAerReader, UnwrapsTimestampOverflow) {
  const auto ev = read_raw(raw_record(0, 0xFFFFFFFFu) + raw_record(0, 0));
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].t, 4294967295ull);
  EXPECT_EQ(ev[1].t, 4294967296ull);
}

TEST(RawAerReader, RejectsTruncatedRecord) {
  const std::string rec = raw_record(0, 1);
  try {
    read_raw("#h\n" + rec + rec.substr(0, 7));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 3u + 8u);
  }
}

TEST(RawAerReader, RejectsOutOfRangeAndSmallBackwardJumps) {
  const AddressDecode dec;
  EXPECT_THROW(read_raw(raw_record(dec.encode(300, 0, Polarity::On), 1)), RangeError);
  EXPECT_THROW(read_raw(raw_record(0, 100) + raw_record(0, 50)), OrderingError);
}

TEST(RawAerReader, EmptyInputs) {
  EXPECT_TRUE(read_raw("").empty());
  EXPECT_TRUE(read_raw("#only a header\n").empty());
}

TEST(RawAerReader, UnwrappedTimestampsAreMonotone) {
  test_support::Rng rng(5);
  std::string bytes = "#!AER-DAT2.0\n";
  std::uint64_t real_t = rng.below(1ull << 32);
  std::vector<std::uint64_t> expected;
  for (int i = 0; i < 5000; ++i) {
    real_t += rng.below(1u << 22);  // far below 2^31 per step
    expected.push_back(real_t);
    bytes += raw_record(AddressDecode{}.encode(static_cast<std::uint32_t>(rng.below(240)), static_cast<std::uint32_t>(rng.below(180)),
                                                Polarity::On),
                        static_cast<std::uint32_t>(real_t));
  }
  const auto ev = read_raw(bytes);
  ASSERT_EQ(ev.size(), expected.size());
  const std::uint64_t base = expected.front() & ~0xFFFFFFFFull;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    ASSERT_EQ(ev[i].t + base, expected[i]);
    if (i > 0) {
      ASSERT_GE(ev[i].t, ev[i - 1].t);
    }
  }
}

TEST(RawAerWriter, RoundTrip) {
  test_support::Rng rng(17);
  const auto events = test_support::random_events(rng, {240, 180}, 500);
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_raw_aer_stream(events, buf);
  EXPECT_EQ(read_raw_aer_stream(buf, {240, 180}), events);
}

TEST(Stimulus, SingleSourceFiresAtItsPeriod) {
  StimulusSpec spec;
  spec.duration = 10'000;
  spec.sources.push_back({5, 5, 1000.0, 0, 5000});
  const auto ev = generate_stimulus(spec);
  ASSERT_EQ(ev.size(), 6u);
  for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_EQ(ev[i], (Event{i * 1000, 5, 5, Polarity::On}));
}

TEST(Stimulus, EmptySpecGivesEmptyStream) {
  StimulusSpec spec;
  spec.duration = 1'000'000;
  EXPECT_TRUE(generate_stimulus(spec).empty());
  spec.sources.push_back({1, 1, 1000.0, 0, 5000});
  spec.duration = 0;
  EXPECT_TRUE(generate_stimulus(spec).empty());
}

TEST(Stimulus, PerSourceCountsMatchIndependentCount) {
  StimulusSpec spec;
  spec.duration = 200'000;
  spec.sources = {{10, 10, 1000.0, 0, 100'000}, {20, 20, 500.0, 0, 100'000}, {30, 30, 250.0, 0, 100'000}};
  const auto ev = generate_stimulus(spec);

  // independent count: scan every microsecond of the interval
  std::map<std::uint32_t, std::size_t> expected;
  for (const PointSource& s : spec.sources) {
    const auto period = static_cast<Timestamp>(1e6 / s.rate_hz);
    for (Timestamp t = 0; t < spec.duration; ++t)
      if (t >= s.start && t <= s.stop && (t - s.start) % period == 0) ++expected[s.x];
  }
  std::map<std::uint32_t, std::size_t> got;
  for (const Event& e : ev) ++got[e.x];
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got[10], 101u);
  EXPECT_EQ(got[20], 51u);
  EXPECT_EQ(got[30], 26u);
}

TEST(Stimulus, TiesFollowDeclarationOrder) {
  StimulusSpec spec;
  spec.duration = 10'000;
  spec.sources = {{9, 0, 1000.0, 0, 3000}, {1, 0, 1000.0, 0, 3000}};
  const auto ev = generate_stimulus(spec);
  ASSERT_EQ(ev.size(), 8u);
  for (std::size_t i = 0; i < ev.size(); i += 2) {
    EXPECT_EQ(ev[i].x, 9u);
    EXPECT_EQ(ev[i + 1].x, 1u);
    EXPECT_EQ(ev[i].t, ev[i + 1].t);
  }
}

TEST(Stimulus, NoiseIsReproducibleAndSeedDependent) {
  StimulusSpec spec;
  spec.duration = 500'000;
  spec.noise_rate_hz = 5000.0;
  spec.sources = {{3, 3, 100.0, 0, 400'000}};
  spec.seed = 11;
  const auto a = generate_stimulus(spec);
  const auto b = generate_stimulus(spec);
  EXPECT_EQ(a, b);
  for (std::size_t i = 1; i < a.size(); ++i) ASSERT_GE(a[i].t, a[i - 1].t);
  // Poisson count for 2500 expected events: well inside +-5 sigma
  EXPECT_NEAR(static_cast<double>(a.size() - 41), 2500.0, 250.0);
  spec.seed = 12;
  EXPECT_NE(generate_stimulus(spec), a);
}

TEST(Stimulus, ValidationRejectsBadSpecs) {
  StimulusSpec spec;
  spec.duration = 10;
  spec.sources = {{0, 0, -1.0, 0, 5}};
  EXPECT_THROW(generate_stimulus(spec), ConfigError);
  spec.sources = {{0, 0, 10.0, 6, 5}};
  EXPECT_THROW(generate_stimulus(spec), ConfigError);
  spec.sources = {{240, 0, 10.0, 0, 5}};
  EXPECT_THROW(generate_stimulus(spec), ConfigError);
  spec.sources.clear();
  spec.noise_rate_hz = -2.0;
  EXPECT_THROW(generate_stimulus(spec), ConfigError);
}
