#include "phc/pipeline.hpp"
#include "phc/errors.hpp"
#include "phc/units.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace phc
{
namespace
{
std::optional<InversionResult> invert(const PointSeries &s, int from_index, double dt_fs,
                                      std::array<double, 2> band)
{
    if (from_index < 0 || static_cast<std::size_t>(from_index) + 1000 > s.value.size())
    {
        return std::nullopt;
    }
    std::span<const double> tail(s.value.data() + from_index, s.value.size() - static_cast<std::size_t>(from_index));
    try
    {
        return harmonic_inversion(tail, dt_fs, band, s.time_fs[static_cast<std::size_t>(from_index)]);
    }
    catch (const NumericsError &)
    {
        return std::nullopt;
    }
}

} // namespace

CavityRunResult run_cavity(const CavityRunSettings &settings, const ProgressFn &progress)
{
    const auto t_start = std::chrono::steady_clock::now();
    CavityRunResult result;
    const double a = settings.device.lattice.a_nm;

    RasterOptions raster;
    raster.resolution = settings.resolution;
    raster.boundary_cells = settings.cpml.thickness;
    raster.memory_budget_bytes = settings.memory_budget_bytes;
    auto grid = std::make_shared<PermittivityGrid>(rasterize(settings.device, raster));
    result.full_dims = grid->dims;
    result.dx_nm = grid->dx_nm;

    SimulationConfig cfg;
    cfg.grid = grid;
    cfg.a_nm = a;
    cfg.courant = settings.courant;
    cfg.steps = settings.steps;
    cfg.cpml = settings.cpml;
    cfg.symmetry = settings.symmetry;
    cfg.workers = settings.workers;
    SourceSpec src;
    src.component = settings.source_component;
    src.center_wavelength_nm = settings.device.target_wavelength_nm;
    src.bandwidth_nm = settings.source_bandwidth_nm;
    for (int d = 0; d < 3; ++d)
    {
        src.position_nm[d] = settings.source_offset_a[d] * a;
    }
    cfg.sources.push_back(src);
    MonitorSpec probe;
    probe.name = "probe";
    probe.components = {settings.probe_component};
    for (int d = 0; d < 3; ++d)
    {
        probe.position_nm[d] = settings.probe_offset_a[d] * a;
    }
    cfg.monitors.push_back(probe);

    Simulation sim(cfg);
    result.stored_dims = sim.dims();
    result.dt_fs = cfg.dt_fs();
    const auto pulse = make_pulse(src, a);
    result.gate_step = static_cast<int>(std::ceil(settings.gate_cutoffs * pulse.cutoff / cfg.dt()));
    const auto band = settings.band_nm();

    const int total = settings.steps;
    const int dft_start = total - static_cast<int>(std::floor(settings.dft_fraction * total));
    auto advance = [&](int until) {
        const int chunk = 500;
        while (sim.current_step() < until)
        {
            sim.run(std::min(chunk, until - sim.current_step()));
            if (progress)
            {
                progress(sim.current_step(), total);
            }
        }
    };

    // Ring-down up to the start of the profile window, then locate the mode.
    advance(dft_start);
    bool have_dft = false;
    if (settings.mode_volume)
    {
        const auto early = invert(sim.records().series.front(), result.gate_step, result.dt_fs, band);
        if (early && !early->modes.empty())
        {
            result.dft_frequency = a / early->modes.front().wavelength_nm;
            sim.add_dft({result.dft_frequency, sim.current_step(), settings.dft_stride});
            have_dft = true;
        }
        else
        {
            result.note = "no resonance found before the profile window; mode volume skipped";
        }
    }
    advance(total);
    result.steps_run = sim.current_step();

    auto records = sim.records();
    result.probe = records.series.front();
    const auto final_fit = invert(result.probe, result.gate_step, result.dt_fs, band);
    if (!final_fit)
    {
        if (!result.note)
        {
            result.note = "fewer than 1000 samples after the source gate; no inversion";
        }
    }
    else
    {
        result.modes = final_fit->modes;
        result.inversion_warning = final_fit->warning;
        if (!result.modes.empty())
        {
            result.fundamental = 0;
        }
    }

    if (have_dft && result.fundamental)
    {
        const auto &mode = result.modes[*result.fundamental];
        VectorField full = unfold(records.dfts.front(), sim.config());
        result.volume = mode_volume(*grid, full, mode.wavelength_nm, settings.device.lattice.n_slab);
        result.purcell = purcell_factor(mode.Q, result.volume->Vm_normalized);
        result.dielectric_fraction = dielectric_energy_fraction(*grid, full);
        if (settings.keep_profile)
        {
            result.profile = std::move(full);
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

} // namespace phc
