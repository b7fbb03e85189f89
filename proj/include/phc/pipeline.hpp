#pragma once

#include "phc/analysis.hpp"
#include "phc/fdtd.hpp"
#include "phc/geometry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace phc
{
// Everything needed for one cavity ring-down: device, discretization, source,
// probe and analysis settings.
struct CavityRunSettings
{
    DeviceSpec device;
    double resolution = 16.0;
    int steps = 0;
    double courant = 0.5;
    CpmlParams cpml;
    // Fundamental L3 / HS family: Hz odd in x, even in y, TE-like (even) in z.
    SymmetrySpec symmetry{{Parity::kOdd, Parity::kEven, Parity::kEven}};
    Component source_component = Component::Ey;
    // Source offset from the cavity centre, in units of a.
    std::array<double, 3> source_offset_a{0.1, 0.05, 0.0};
    double source_bandwidth_nm = 100.0;
    Component probe_component = Component::Ey;
    std::array<double, 3> probe_offset_a{0.1, 0.05, 0.0};
    // Analysis band as fractions of the target wavelength.
    std::array<double, 2> band_fraction{0.92, 1.08};
    // Discard samples before this multiple of the source cutoff.
    double gate_cutoffs = 2.0;
    // Accumulate the mode profile over this final fraction of the run.
    double dft_fraction = 2.0 / 3.0;
    int dft_stride = 4;
    bool mode_volume = true;
    // Return the unfolded mode profile (full grid, complex E).
    bool keep_profile = false;
    int workers = 1;
    std::size_t memory_budget_bytes = std::size_t{4} << 30;

    std::array<double, 2> band_nm() const
    {
        return {band_fraction[0] * device.target_wavelength_nm, band_fraction[1] * device.target_wavelength_nm};
    }
};

struct CavityRunResult
{
    GridDims full_dims;
    GridDims stored_dims;
    double dx_nm = 0.0;
    double dt_fs = 0.0;
    int steps_run = 0;
    int gate_step = 0;
    PointSeries probe;
    std::vector<ResonantMode> modes;
    std::optional<std::string> inversion_warning;
    std::optional<std::string> note;
    // Index into modes of the dominant (largest-amplitude) resonance.
    std::optional<std::size_t> fundamental;
    double dft_frequency = 0.0;
    std::optional<ModeVolumeResult> volume;
    std::optional<double> purcell;
    std::optional<double> dielectric_fraction;
    std::optional<VectorField> profile;
    double seconds = 0.0;
};

using ProgressFn = std::function<void(int step, int total)>;

// rasterize -> ring-down -> harmonic inversion -> mode profile -> Vm, Purcell.
CavityRunResult run_cavity(const CavityRunSettings &settings, const ProgressFn &progress = {});

} // namespace phc
