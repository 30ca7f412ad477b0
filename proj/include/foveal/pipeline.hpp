#pragma once

// End-to-end attention pipeline:
//
//   split_words -> input handshake -> merge_words -> gate / modulation gain
//     -> saliency -> fovea filter -> output handshake
//
// Every stage is synchronous and runs once per input event, so the output is
// identical to a fully sequential execution.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "foveal/errors.hpp"
#include "foveal/events.hpp"
#include "foveal/saliency.hpp"
#include "foveal/topdown.hpp"

namespace foveal {

// ---------------------------------------------------------------------------
// Word-serial framing

enum class WordKind : std::uint8_t { Y, X };

/// Order in which the two coordinate words of an event travel on the bus.
enum class WordOrder : std::uint8_t { YThenX, XThenY };

struct AerWord {
  WordKind kind = WordKind::Y;
  std::uint32_t coordinate = 0;
  Polarity polarity = Polarity::On;  // meaningful on X words only
  Timestamp t = 0;
  friend constexpr bool operator==(const AerWord&, const AerWord&) = default;
};

inline void split_event(const Event& e, WordOrder order, std::vector<AerWord>& out) {
  const AerWord y{WordKind::Y, e.y, Polarity::On, e.t};
  const AerWord x{WordKind::X, e.x, e.p, e.t};
  if (order == WordOrder::YThenX) {
    out.push_back(y);
    out.push_back(x);
  } else {
    out.push_back(x);
    out.push_back(y);
  }
}

inline std::vector<AerWord> split_words(std::span<const Event> events, WordOrder order = WordOrder::YThenX) {
  std::vector<AerWord> words;
  words.reserve(events.size() * 2);
  for (const Event& e : events) split_event(e, order, words);
  return words;
}

/// Streaming word merger. The leading word of a pair is latched; the trailing
/// word emits the event with its own timestamp. A second leading word
/// overwrites the latch, and a trailing word with nothing latched is dropped.
/// Both count as protocol errors.
class WordMerger {
 public:
  explicit WordMerger(WordOrder order = WordOrder::YThenX) : order_(order) {}

  std::optional<Event> push(const AerWord& w) {
    const WordKind leading = order_ == WordOrder::YThenX ? WordKind::Y : WordKind::X;
    if (w.kind == leading) {
      if (latched_) ++protocol_errors_;
      latched_ = w;
      return std::nullopt;
    }
    if (!latched_) {
      ++protocol_errors_;
      return std::nullopt;
    }
    const AerWord& x = w.kind == WordKind::X ? w : *latched_;
    const AerWord& y = w.kind == WordKind::Y ? w : *latched_;
    Event e{w.t, x.coordinate, y.coordinate, x.polarity};
    latched_.reset();
    return e;
  }

  std::uint64_t protocol_errors() const { return protocol_errors_; }

 private:
  WordOrder order_;
  std::optional<AerWord> latched_;
  std::uint64_t protocol_errors_ = 0;
};

struct MergeResult {
  std::vector<Event> events;
  std::uint64_t protocol_errors = 0;
};

inline MergeResult merge_words(std::span<const AerWord> words, WordOrder order = WordOrder::YThenX) {
  WordMerger merger(order);
  MergeResult r;
  for (const AerWord& w : words)
    if (auto e = merger.push(w)) r.events.push_back(*e);
  r.protocol_errors = merger.protocol_errors();
  return r;
}

// ---------------------------------------------------------------------------
// 4-phase handshake

enum class HandshakePhase : std::uint8_t { Idle, ReqUp, AckUp, ReqDown };

inline const char* to_string(HandshakePhase p) {
  switch (p) {
    case HandshakePhase::Idle: return "Idle";
    case HandshakePhase::ReqUp: return "ReqUp";
    case HandshakePhase::AckUp: return "AckUp";
    default: return "ReqDown";
  }
}

/// Transaction-level model of a 4-phase request/acknowledge link carrying one
/// datum per cycle: Idle -> ReqUp -> AckUp -> ReqDown -> Idle.
///
/// The four phase methods may be driven individually by independent sender
/// and receiver processes. send()/receive() are the usual shorthand; receive()
/// runs the whole return-to-zero half of the cycle. Any out-of-phase call
/// increments protocol_errors() and throws ContractViolation without changing
/// the phase.
template <class T>
class HandshakeChannel {
 public:
  // Sender: put data on the bus and raise request.
  void send(T datum) {
    expect(HandshakePhase::Idle, "send");
    slot_ = std::move(datum);
    phase_ = HandshakePhase::ReqUp;
  }

  // Receiver: latch the data and raise acknowledge.
  T acknowledge() {
    expect(HandshakePhase::ReqUp, "acknowledge");
    phase_ = HandshakePhase::AckUp;
    ++transferred_;
    T out = std::move(*slot_);
    slot_.reset();
    return out;
  }

  // Sender: drop request after seeing acknowledge.
  void release_request() {
    expect(HandshakePhase::AckUp, "release_request");
    phase_ = HandshakePhase::ReqDown;
  }

  // Receiver: drop acknowledge; the link is idle again.
  void release_acknowledge() {
    expect(HandshakePhase::ReqDown, "release_acknowledge");
    phase_ = HandshakePhase::Idle;
  }

  T receive() {
    T out = acknowledge();
    release_request();
    release_acknowledge();
    return out;
  }

  HandshakePhase phase() const { return phase_; }
  bool in_flight() const { return slot_.has_value(); }
  std::uint64_t transferred() const { return transferred_; }
  std::uint64_t protocol_errors() const { return protocol_errors_; }

 private:
  void expect(HandshakePhase want, const char* op) {
    if (phase_ == want) return;
    ++protocol_errors_;
    throw ContractViolation(std::string(op) + " called in phase " + to_string(phase_) + ", expected " +
                            to_string(want));
  }

  HandshakePhase phase_ = HandshakePhase::Idle;
  std::optional<T> slot_;
  std::uint64_t transferred_ = 0;
  std::uint64_t protocol_errors_ = 0;
};

// ---------------------------------------------------------------------------
// Fovea

/// Passes `e` only if it lies inside the focus window of the current winner.
constexpr std::optional<Event> fovea_filter(const Event& e, std::optional<Pixel> winner, const AttentionConfig& cfg) {
  if (!winner) return std::nullopt;
  if (!foa_window(*winner, cfg.foa, cfg.resolution).contains(e.x, e.y)) return std::nullopt;
  return e;
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineStats {
  std::uint64_t events_in = 0;
  std::uint64_t events_gated = 0;
  std::uint64_t dropped_no_winner = 0;
  std::uint64_t dropped_outside_foa = 0;
  std::uint64_t events_out = 0;
  std::uint64_t winner_switches = 0;
  std::uint64_t words_transferred = 0;
  std::uint64_t protocol_errors = 0;
  friend bool operator==(const PipelineStats&, const PipelineStats&) = default;
};

struct PipelineOutput {
  std::vector<Event> foveated;
  std::vector<FocusSample> trajectory;
  PipelineStats stats;
};

struct PipelineOptions {
  WordOrder word_order = WordOrder::YThenX;
};

class Pipeline {
 public:
  Pipeline(AttentionConfig cfg, TopDownConfig td, PipelineOptions opts = {})
      : cfg_(std::move(cfg)), td_(td), opts_(opts), state_(cfg_.resolution), merger_(opts.word_order) {
    cfg_.validate();
    td_.validate(cfg_.resolution);
  }

  /// Feeds one event; returns it if it leaves through the fovea.
  std::optional<Event> push(const Event& in) {
    if (stats_.events_in > 0 && in.t < last_t_)
      throw OrderingError("input event at t=" + std::to_string(in.t) + " precedes t=" + std::to_string(last_t_));
    if (!cfg_.resolution.contains(in.x, in.y))
      throw RangeError("event (" + std::to_string(in.x) + "," + std::to_string(in.y) + ") outside sensor");
    last_t_ = in.t;
    ++stats_.events_in;

    words_.clear();
    split_event(in, opts_.word_order, words_);
    std::optional<Event> merged;
    for (const AerWord& w : words_) {
      input_link_.send(w);
      if (auto e = merger_.push(input_link_.receive())) merged = e;
    }
    stats_.words_transferred = input_link_.transferred();
    stats_.protocol_errors = merger_.protocol_errors() + input_link_.protocol_errors() + output_link_.protocol_errors();
    if (!merged) return std::nullopt;

    const std::optional<Event> passed = gate(*merged, td_);
    if (!passed) {
      ++stats_.events_gated;
      return std::nullopt;
    }

    if (auto sample = process_event(state_, *passed, modulation_gain(*passed, td_), cfg_)) {
      trajectory_.push_back(*sample);
      ++stats_.winner_switches;
    }

    if (!state_.winner) {
      ++stats_.dropped_no_winner;
      return std::nullopt;
    }
    const std::optional<Event> out = fovea_filter(*passed, state_.winner, cfg_);
    if (!out) {
      ++stats_.dropped_outside_foa;
      return std::nullopt;
    }
    output_link_.send(*out);
    ++stats_.events_out;
    return output_link_.receive();
  }

  const PipelineStats& stats() const { return stats_; }
  const std::vector<FocusSample>& trajectory() const { return trajectory_; }
  std::vector<FocusSample> take_trajectory() { return std::exchange(trajectory_, {}); }
  const SaliencyState& saliency() const { return state_; }
  const AttentionConfig& config() const { return cfg_; }

 private:
  AttentionConfig cfg_;
  TopDownConfig td_;
  PipelineOptions opts_;
  SaliencyState state_;
  WordMerger merger_;
  HandshakeChannel<AerWord> input_link_;
  HandshakeChannel<Event> output_link_;
  std::vector<AerWord> words_;
  std::vector<FocusSample> trajectory_;
  PipelineStats stats_;
  Timestamp last_t_ = 0;
};

inline PipelineOutput run_pipeline(std::span<const Event> input, const AttentionConfig& cfg, const TopDownConfig& td,
                                   PipelineOptions opts = {}) {
  Pipeline pipe(cfg, td, opts);
  PipelineOutput out;
  for (const Event& e : input)
    if (auto f = pipe.push(e)) out.foveated.push_back(*f);
  out.trajectory = pipe.take_trajectory();
  out.stats = pipe.stats();
  return out;
}

// ---------------------------------------------------------------------------
// Output files

inline void write_trajectory_csv(const std::vector<FocusSample>& trajectory, std::ostream& out) {
  out << "# t_us,cx,cy\n";
  for (const FocusSample& s : trajectory) out << s.t << ',' << s.cx << ',' << s.cy << '\n';
  if (!out) throw std::runtime_error("failed writing trajectory");
}

inline std::vector<FocusSample> read_trajectory_csv(std::istream& in) {
  std::vector<FocusSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected t_us,cx,cy");
    FocusSample s;
    if (!detail::parse_uint(detail::trim(view.substr(0, c1)), s.t) ||
        !detail::parse_uint(detail::trim(view.substr(c1 + 1, c2 - c1 - 1)), s.cx) ||
        !detail::parse_uint(detail::trim(view.substr(c2 + 1)), s.cy))
      throw ParseError(line_no, "expected t_us,cx,cy");
    samples.push_back(s);
  }
  return samples;
}

inline void write_stats(const PipelineStats& s, std::ostream& out) {
  out << "events_in=" << s.events_in << '\n'
      << "events_gated=" << s.events_gated << '\n'
      << "events_dropped_no_winner=" << s.dropped_no_winner << '\n'
      << "events_dropped_outside_foa=" << s.dropped_outside_foa << '\n'
      << "events_out=" << s.events_out << '\n'
      << "winner_switches=" << s.winner_switches << '\n'
      << "words_transferred=" << s.words_transferred << '\n'
      << "protocol_errors=" << s.protocol_errors << '\n';
  if (!out) throw std::runtime_error("failed writing stats");
}

}  // namespace foveal
