#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fibertb/fiber.hpp"
#include "fibertb/report.hpp"

namespace fibertb::cli {

enum class Pipeline { CharacterizePhase, CharacterizePolarization, CharacterizeDelay, RunProtocol };

std::string_view to_string(Pipeline pipeline);

enum class ChannelPreset { Field, Ideal };

struct Scenario {
  Pipeline pipeline = Pipeline::CharacterizePhase;
  /// Restricts characterization to one topology; empty runs differential and round trip.
  std::optional<ConfigurationKind> configuration;
  std::optional<std::filesystem::path> calibration;
  std::optional<std::filesystem::path> session;
  std::optional<std::filesystem::path> wind;
  std::optional<std::filesystem::path> temperature;
  ChannelPreset channel = ChannelPreset::Field;
  std::uint64_t seed = 1;
  std::optional<double> duration;  // seconds; each pipeline has its own default
  std::filesystem::path out = "fibertb-out";
  bool event_log = false;
};

/// Fields read from a scenario file's [scenario] section. Relative paths
/// are resolved against the file's directory.
struct ScenarioFile {
  std::optional<std::string> configuration;
  std::optional<std::filesystem::path> calibration;
  std::optional<std::filesystem::path> session;
  std::optional<std::filesystem::path> wind;
  std::optional<std::filesystem::path> temperature;
  std::optional<std::string> channel;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<std::filesystem::path> out;
};

/// Throws ConfigError when the file is missing or malformed.
ScenarioFile load_scenario_file(const std::filesystem::path& path);

/// Copies every field the file sets onto `scenario`.
void apply(const ScenarioFile& file, Scenario& scenario);

ConfigurationKind parse_configuration(std::string_view text);
ChannelPreset parse_channel(std::string_view text);

/// Throws ConfigError unless duration > 0 and every referenced file exists.
void validate(const Scenario& scenario);

struct PlotFile {
  std::string name;
  std::vector<PlotColumn> columns;
};

struct ScenarioResult {
  std::vector<ReportRecord> records;
  std::vector<PlotFile> plots;
  std::string event_log;  // empty unless requested
};

/// Runs the selected pipeline. Pure: nothing is written to disk.
ScenarioResult run_scenario(const Scenario& scenario);

/// Writes report.txt, one .dat file per plot and the optional event log
/// into `directory`, creating it if needed. Throws IoError.
void write_outputs(const ScenarioResult& result, const std::filesystem::path& directory);

/// Exit status for each failure class.
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

}  // namespace fibertb::cli
