#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fibertb/errors.hpp"
#include "fibertb/report.hpp"
#include "fibertb_cli/scenario.hpp"

namespace {

using namespace fibertb;
using namespace fibertb::cli;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<std::string> out;
  std::optional<std::string> configuration;
  std::optional<std::string> calibration;
  std::optional<std::string> session;
  std::optional<std::string> wind;
  std::optional<std::string> temperature;
  std::optional<std::string> channel;
  unsigned jobs = 1;
  unsigned repeat = 1;
  bool log = false;
};

void add_run_options(CLI::App& cmd, Flags& f, bool protocol) {
  cmd.add_option("--config", f.config, "Scenario file (default: $FIBERTB_CONFIG)");
  cmd.add_option("--seed", f.seed, "Random seed");
  cmd.add_option("--duration", f.duration, "Simulated duration in seconds");
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_option("--calibration", f.calibration, "Span calibration INI file");
  cmd.add_option("--wind", f.wind, "Wind CSV (timestamp,value,unit)");
  cmd.add_option("--jobs", f.jobs, "Parallel workers for --repeat")->check(CLI::PositiveNumber);
  cmd.add_option("--repeat", f.repeat, "Run N consecutive seeds into out/seed_<s>/")->check(CLI::PositiveNumber);
  if (protocol) {
    cmd.add_option("--session", f.session, "Session INI file");
    cmd.add_option("--channel", f.channel, "Channel preset when no session file is given")
        ->check(CLI::IsMember({"field", "ideal"}));
    cmd.add_flag("--log", f.log, "Write the session event log to events.csv");
  } else {
    cmd.add_option("--configuration", f.configuration, "Restrict to one topology")
        ->check(CLI::IsMember({"differential", "round-trip", "three-node"}));
    cmd.add_option("--temperature", f.temperature, "Temperature CSV (timestamp,value,unit)");
  }
}

Scenario build_scenario(Pipeline pipeline, const Flags& f) {
  Scenario s;
  s.pipeline = pipeline;
  std::string config = f.config;
  if (config.empty()) {
    if (const char* env = std::getenv("FIBERTB_CONFIG"); env && *env) config = env;
  }
  if (!config.empty()) apply(load_scenario_file(config), s);
  if (f.configuration) s.configuration = parse_configuration(*f.configuration);
  if (f.calibration) s.calibration = *f.calibration;
  if (f.session) s.session = *f.session;
  if (f.wind) s.wind = *f.wind;
  if (f.temperature) s.temperature = *f.temperature;
  if (f.channel) s.channel = parse_channel(*f.channel);
  if (f.seed) s.seed = *f.seed;
  if (f.duration) s.duration = *f.duration;
  if (f.out) s.out = *f.out;
  s.event_log = f.log;
  validate(s);
  return s;
}

int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError& e) {
    std::cerr << "fibertb: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "fibertb: i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "fibertb: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "fibertb: error: " << e.what() << '\n';
    return 1;
  }
}

int run(Pipeline pipeline, const Flags& f) {
  std::vector<Scenario> runs;
  try {
    const Scenario base = build_scenario(pipeline, f);
    if (f.repeat == 1) {
      runs.push_back(base);
    } else {
      for (unsigned i = 0; i < f.repeat; ++i) {
        Scenario s = base;
        s.seed = base.seed + i;
        s.out = base.out / fmt::format("seed_{}", s.seed);
        runs.push_back(std::move(s));
      }
    }
  } catch (...) {
    return exit_code_for(std::current_exception());
  }

  std::vector<std::exception_ptr> errors(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex print;
  const auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        const ScenarioResult result = run_scenario(runs[i]);
        write_outputs(result, runs[i].out);
        const std::lock_guard lock(print);
        std::cout << fmt::format("{}: seed {} -> {}\n", to_string(pipeline), runs[i].seed,
                                 (runs[i].out / "report.txt").string());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(f.jobs, static_cast<unsigned>(runs.size()));
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();

  for (const auto& e : errors) {
    if (e) return exit_code_for(e);
  }
  return 0;
}

int show_reports(const std::vector<std::string>& inputs) {
  try {
    for (const auto& input : inputs) {
      std::filesystem::path path(input);
      if (std::filesystem::is_directory(path)) path /= "report.txt";
      if (!std::filesystem::exists(path)) throw IoError(fmt::format("no report at {}", path.string()));
      std::cout << "== " << path.string() << '\n';
      for (const auto& record : load_report(path)) {
        std::cout << fmt::format("{} [{}]\n", record.name, record.kind);
        for (const auto& [key, value] : record.fields) {
          if (const auto* number = std::get_if<double>(&value)) {
            std::cout << fmt::format("  {:<32} {:.6g}\n", key, *number);
          } else {
            std::cout << fmt::format("  {:<32} {}\n", key, std::get<std::string>(value));
          }
        }
      }
    }
  } catch (...) {
    return exit_code_for(std::current_exception());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiber testbed characterization and time-bin protocol simulator"};
  app.require_subcommand(1);

  struct Command {
    Pipeline pipeline;
    const char* name;
    const char* help;
    Flags flags;
    CLI::App* app = nullptr;
  };
  std::vector<Command> commands{
      {Pipeline::CharacterizePhase, "characterize-phase", "Phase noise variance, covariance and spectrum", {}},
      {Pipeline::CharacterizePolarization, "characterize-polarization", "Polarization drift against wind", {}},
      {Pipeline::CharacterizeDelay, "characterize-delay", "Thermal path-delay coefficients", {}},
      {Pipeline::RunProtocol, "run-protocol", "Time-bin qubit session with BER", {}},
  };
  for (auto& c : commands) {
    c.app = app.add_subcommand(c.name, c.help);
    add_run_options(*c.app, c.flags, c.pipeline == Pipeline::RunProtocol);
  }

  std::vector<std::string> report_inputs;
  auto* report = app.add_subcommand("report", "Print report files or output directories");
  report->add_option("inputs", report_inputs, "report.txt files or output directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (report->parsed()) return show_reports(report_inputs);
  for (const auto& c : commands) {
    if (c.app->parsed()) return run(c.pipeline, c.flags);
  }
  return kExitConfig;
}
