// foveal: command-line driver for the event-driven attention pipeline.
//
//   foveal run <config>              attention pipeline -> foveated.csv, trajectory.csv, stats.txt
//   foveal gen <stimulus> [-o FILE]  synthetic point-source / noise stream as CSV
//   foveal render <events> [...]     time surface (PGM) or trajectory overlay (PPM)
//
// Exit codes: 0 success, 2 configuration error, 3 input format error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "foveal/config.hpp"
#include "foveal/events.hpp"
#include "foveal/pipeline.hpp"
#include "foveal/render.hpp"

namespace fs = std::filesystem;
using namespace foveal;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;

constexpr const char* kEventHeader = "# t_us,x,y,p\n";

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

std::vector<Event> load_events(const fs::path& path, InputFormat format, Resolution res, const AddressDecode& decode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input '" + path.string() + "'");
  return format == InputFormat::Csv ? read_csv_stream(in, res) : read_raw_aer_stream(in, res, decode);
}

int cmd_run(const fs::path& config_path) {
  RunConfig cfg;
  try {
    cfg = RunConfig::from_file(KeyValueFile::load(config_path), fs::absolute(config_path).parent_path());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::vector<Event> events;
  try {
    events = load_events(cfg.input_path, cfg.input_format, cfg.attention.resolution, cfg.decode);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << cfg.input_path.string() << ": " << e.what() << '\n';
    return kExitInput;
  }

  const PipelineOutput out = run_pipeline(events, cfg.attention, cfg.topdown, cfg.pipeline);

  fs::create_directories(cfg.output_dir);
  {
    auto f = open_out(cfg.output_dir / "foveated.csv");
    f << kEventHeader;
    write_csv_stream(out.foveated, f);
  }
  {
    auto f = open_out(cfg.output_dir / "trajectory.csv");
    write_trajectory_csv(out.trajectory, f);
  }
  {
    auto f = open_out(cfg.output_dir / "stats.txt");
    write_stats(out.stats, f);
  }
  {
    auto f = open_out(cfg.output_dir / "effective.conf");
    f << cfg.to_text();
  }
  std::cout << "events in " << out.stats.events_in << ", out " << out.stats.events_out << ", winner switches "
            << out.stats.winner_switches << " -> " << cfg.output_dir.string() << '\n';
  return 0;
}

int cmd_gen(const fs::path& spec_path, const std::optional<fs::path>& output) {
  std::vector<Event> events;
  try {
    events = generate_stimulus(parse_stimulus(KeyValueFile::load(spec_path)));
  } catch (const ConfigError& e) {
    std::cerr << "stimulus error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (output) {
    auto f = open_out(*output);
    f << kEventHeader;
    write_csv_stream(events, f);
  } else {
    std::cout << kEventHeader;
    write_csv_stream(events, std::cout);
  }
  return 0;
}

struct RenderArgs {
  fs::path events;
  std::optional<fs::path> trajectory;
  fs::path output;
  std::optional<Timestamp> t_ref;
  Timestamp tau_vis = 50'000;
  bool invert = false;
  Resolution resolution;
};

int cmd_render(const RenderArgs& a) {
  if (a.resolution.width == 0 || a.resolution.height == 0) {
    std::cerr << "config error: resolution must be positive\n";
    return kExitConfig;
  }
  std::vector<Event> events;
  std::vector<FocusSample> trajectory;
  try {
    std::ifstream in(a.events);
    if (!in) throw ConfigError("cannot open '" + a.events.string() + "'");
    events = read_csv_stream(in, a.resolution);
    if (a.trajectory) {
      std::ifstream tin(*a.trajectory);
      if (!tin) throw ConfigError("cannot open '" + a.trajectory->string() + "'");
      trajectory = read_trajectory_csv(tin);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RangeError& e) {
    std::cerr << "resolution mismatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }

  const Timestamp t_ref = a.t_ref.value_or(events.empty() ? 0 : events.back().t);
  TimeSurface ts;
  RgbImage overlay;
  try {
    ts = render_time_surface(events, t_ref, a.tau_vis, a.resolution);
    if (a.invert) invert(ts);
    if (a.trajectory) overlay = overlay_trajectory(ts, trajectory);
  } catch (const RangeError& e) {
    std::cerr << "resolution mismatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  auto f = open_out(a.output, true);
  if (a.trajectory) write_ppm(overlay, f);
  else write_pgm(ts, f);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven saliency attention pipeline"};
  app.require_subcommand(1);

  fs::path run_config;
  auto* run = app.add_subcommand("run", "Run the attention pipeline described by a config file");
  run->add_option("config", run_config, "Run configuration (key = value)")->required();

  fs::path stim_path;
  std::optional<fs::path> gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic event stream");
  gen->add_option("stimulus", stim_path, "Stimulus specification (key = value)")->required();
  gen->add_option("-o,--output", gen_out, "Output CSV (default: stdout)");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render a time surface, optionally with a trajectory overlay");
  render->add_option("events", ra.events, "Event stream CSV")->required();
  render->add_option("--trajectory", ra.trajectory, "Trajectory CSV (t_us,cx,cy); produces a PPM overlay");
  render->add_option("-o,--output", ra.output, "Output image (.pgm or .ppm)")->required();
  render->add_option("--t-ref", ra.t_ref, "Reference time in us (default: last event)");
  render->add_option("--tau-vis", ra.tau_vis, "Visualisation decay constant in us")->capture_default_str();
  render->add_flag("--invert", ra.invert, "Darker means more recent");
  render->add_option("--width", ra.resolution.width, "Sensor width")->capture_default_str();
  render->add_option("--height", ra.resolution.height, "Sensor height")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config);
    if (*gen) return cmd_gen(stim_path, gen_out);
    if (*render) return cmd_render(ra);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
