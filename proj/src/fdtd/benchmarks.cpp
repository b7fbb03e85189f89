#include "phc/fdtd.hpp"

#include "phc/units.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace phc
{
namespace
{
// Quasi-1D run along z (x and y periodic with one cell). Returns the Ex
// trace at the probe.
std::vector<double> pulse_trace(double resolution, const CpmlParams &cpml, int extra_cells, int steps)
{
    constexpr double kWavelength = 1000.0;
    const int interior = 120;
    const int nz = 2 * (cpml.thickness + interior + extra_cells);
    const double dx = kWavelength / resolution;
    auto grid = std::make_shared<PermittivityGrid>(PermittivityGrid::uniform({1, 1, nz}, dx));

    SimulationConfig cfg;
    cfg.grid = grid;
    cfg.a_nm = kWavelength;
    cfg.courant = 0.5;
    cfg.steps = steps;
    cfg.cpml = cpml;
    cfg.periodic = {true, true, false};

    SourceSpec src;
    src.component = Component::Ex;
    src.center_wavelength_nm = kWavelength;
    src.bandwidth_nm = 0.5 * kWavelength;
    src.position_nm = {0.0, 0.0, 0.0};
    cfg.sources.push_back(src);

    MonitorSpec probe;
    probe.name = "probe";
    probe.components = {Component::Ex};
    // probe sits between the source and the upper absorber, 20 cells in front of it
    probe.position_nm = {0.0, 0.0, (interior - 20) * dx};
    cfg.monitors.push_back(probe);
    return run(cfg).series.front().value;
}

} // namespace

double cpml_reflection_test(double resolution, const CpmlParams &cpml)
{
    const CpmlParams absorber = cpml;
    // long enough for the pulse to pass the probe, reach the wall and come back
    const auto pulse = make_pulse(SourceSpec{{}, Component::Ex, 1000.0, 500.0, 1.0, {}}, 1000.0);
    const double dt = 0.5 / resolution;
    const int steps = static_cast<int>((pulse.cutoff + 2.0 * 160.0 / resolution) / dt);
    const auto near = pulse_trace(resolution, absorber, 0, steps);
    // reference: same probe geometry with the walls pushed far enough away
    // that nothing returns within the window
    const int far_cells = steps / 2 + 40;
    CpmlParams reference = absorber;
    reference.thickness = std::max(absorber.thickness, 10);
    const auto far = pulse_trace(resolution, reference, far_cells, steps);
    double incident = 0.0;
    double reflected = 0.0;
    for (std::size_t n = 0; n < near.size(); ++n)
    {
        incident = std::max(incident, std::abs(far[n]));
        reflected = std::max(reflected, std::abs(near[n] - far[n]));
    }
    return reflected / incident;
}

SlabTransmission slab_transmission(double n, double thickness_nm, std::array<double, 2> band_nm,
                                   double cells_per_material_wavelength, int samples)
{
    // Whole number of cells across the slab, at least the requested density at the shortest wavelength.
    const double dx_max = band_nm[0] / n / cells_per_material_wavelength;
    const int slab_cells = static_cast<int>(std::ceil(thickness_nm / dx_max));
    const double dx = thickness_nm / slab_cells;
    const int margin = 60;
    const int pml = 20;
    const int nz = 2 * (pml + margin) + slab_cells + 2 * margin;
    const double lambda_c = 0.5 * (band_nm[0] + band_nm[1]);

    auto trace = [&](bool with_slab) {
        auto grid = std::make_shared<PermittivityGrid>(PermittivityGrid::uniform({1, 1, nz}, dx));
        // Slab centred on node nz/2; interface nodes take the average.
        const int k0 = nz / 2 - slab_cells / 2;
        const int k1 = k0 + slab_cells;
        if (with_slab)
        {
            for (int k = k0; k <= k1; ++k)
            {
                const double ex = (k == k0 || k == k1) ? 0.5 * (n * n + 1.0) : n * n;
                grid->eps[0][grid->dims.index(0, 0, k)] = ex;
                grid->eps[1][grid->dims.index(0, 0, k)] = ex;
            }
            for (int k = k0; k < k1; ++k)
            {
                grid->eps[2][grid->dims.index(0, 0, k)] = n * n;
            }
        }
        SimulationConfig cfg;
        cfg.grid = grid;
        cfg.a_nm = lambda_c;
        cfg.courant = 0.5;
        cfg.cpml.thickness = pml;
        cfg.periodic = {true, true, false};
        SourceSpec src;
        src.component = Component::Ex;
        src.center_wavelength_nm = lambda_c;
        src.bandwidth_nm = 2.0 * (band_nm[1] - band_nm[0]);
        src.position_nm = {0.0, 0.0, grid->origin_nm[2] + (k0 - margin) * dx};
        cfg.sources.push_back(src);
        MonitorSpec probe;
        probe.name = "t";
        probe.components = {Component::Ex};
        probe.position_nm = {0.0, 0.0, grid->origin_nm[2] + (k1 + margin) * dx};
        cfg.monitors.push_back(probe);
        // pulse plus transit plus ~30 slab round trips
        const auto pulse = make_pulse(src, lambda_c);
        const double transit = (nz * dx + 60.0 * n * thickness_nm) / lambda_c;
        cfg.steps = static_cast<int>((pulse.cutoff + transit) / cfg.dt());
        auto rec = run(cfg);
        return std::make_pair(rec.series.front().value, cfg.dt());
    };
    const auto [ref, dt] = trace(false);
    const auto [slab, dt2] = trace(true);

    SlabTransmission out;
    out.dx_nm = dx;
    for (int i = 0; i < samples; ++i)
    {
        const double lambda = band_nm[0] + (band_nm[1] - band_nm[0]) * i / std::max(1, samples - 1);
        const double f = lambda_c / lambda;
        std::complex<double> a{0.0, 0.0}, b{0.0, 0.0};
        for (std::size_t m = 0; m < ref.size(); ++m)
        {
            const auto w = std::polar(1.0, -2.0 * kPi * f * static_cast<double>(m) * dt);
            a += ref[m] * w;
            b += slab[m] * w;
        }
        out.wavelength_nm.push_back(lambda);
        out.transmission.push_back(std::norm(b) / std::norm(a));
    }
    return out;
}

} // namespace phc
