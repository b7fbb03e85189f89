#pragma once

#include "phc/analysis.hpp"
#include "phc/bands.hpp"
#include "phc/pipeline.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phc
{
// Exit codes; stable across versions.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGeometry = 3;
inline constexpr int kExitSweepFailed = 4;
inline constexpr int kExitNumerics = 5;

struct AnalysisSettings
{
    double gate_cutoffs = 2.0;
    bool mode_volume = true;
    double dft_fraction = 2.0 / 3.0;
    int dft_stride = 4;
    Window window = Window::kHann;
    int padding = 4;
    bool lorentzian = true;
    InversionOptions inversion;
};

struct OutputSettings
{
    std::string directory = "out";
    bool csv = true;
    bool phcf = false;
    // Keep every n-th probe sample in series.csv.
    int decimation = 1;
};

struct BandSettings
{
    int n_waves = 469;
    int n_bands = 8;
    int samples_per_segment = 12;
    ExpansionRule rule = ExpansionRule::kInverse;
    // Background index of the 2D model; empty uses the slab effective index.
    std::optional<double> background_index;
    std::vector<double> gap_map_r_over_a;
};

struct RunConfig
{
    CavityRunSettings run;
    AnalysisSettings analysis;
    OutputSettings output;
    BandSettings bands;
    std::uint64_t seed = 0;
};

struct SweepConfig
{
    RunConfig base;
    // Dotted path into the resolved config, e.g. device.defect.D1.
    std::string axis;
    std::vector<double> values;
    int parallel_jobs = 1;
};

// Strict parsing: unknown keys and type mismatches throw ConfigError naming the
// offending path. A run manifest is accepted in place of a config.
RunConfig parse_run_config(const nlohmann::json &doc);
RunConfig load_run_config(const std::string &path);
SweepConfig parse_sweep_config(const nlohmann::json &doc);
SweepConfig load_sweep_config(const std::string &path);
// Every field, defaults included.
nlohmann::json to_json(const RunConfig &config);

// Copy of `base` with the numeric field at `axis` replaced.
RunConfig with_axis_value(const RunConfig &base, const std::string &axis, double value);

// "PHCF" binary field files.
struct FieldFile
{
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    std::uint32_t nz = 0;
    double dx_nm = 0.0;
    std::vector<std::vector<double>> components;
};
void write_phcf(const std::string &path, const FieldFile &field);
FieldFile read_phcf(const std::string &path);
FieldFile permittivity_file(const PermittivityGrid &grid);

// Subcommands. Each returns an exit code and reports to stdout / stderr.
int cmd_generate(const RunConfig &config);
int cmd_run(const RunConfig &config);
int cmd_sweep(const SweepConfig &config);
int cmd_bands(const RunConfig &config);
int cmd_analyze(const RunConfig &config, const std::string &series_csv);

// Worker count after the PHC_THREADS cap; 0 requests one per hardware thread.
int resolve_workers(int requested);

std::string code_version();

} // namespace phc
