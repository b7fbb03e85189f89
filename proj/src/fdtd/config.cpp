#include "phc/errors.hpp"
#include "phc/fdtd.hpp"
#include "phc/units.hpp"

#include <cmath>
#include <sstream>

namespace phc
{
double CpmlParams::resolved_sigma_max(double dx) const
{
    return sigma_max.value_or(0.8 * (m + 1.0) / dx);
}

void CpmlParams::validate() const
{
    if (thickness < 0 || (thickness > 0 && thickness < 6))
    {
        throw SetupError("CPML thickness must be 0 (bare wall) or at least 6 cells");
    }
    if (!(m >= 1.0))
    {
        throw SetupError("CPML grading order m must be >= 1");
    }
    if (sigma_max && !(*sigma_max > 0.0))
    {
        throw SetupError("CPML sigma_max must be positive");
    }
    if (!(kappa_max >= 1.0) || !(alpha_max >= 0.0))
    {
        throw SetupError("CPML kappa_max must be >= 1 and alpha_max >= 0");
    }
}

int component_parity(Component c, int axis, Parity label)
{
    if (label == Parity::kNone)
    {
        return 1;
    }
    const int hz = label == Parity::kEven ? 1 : -1;
    // Hz is tangential to the x and y planes and normal to the z plane.
    // A vector mirror with phase p leaves tangential E and normal H with
    // parity p, and normal E and tangential H with parity -p.
    const int phase = axis == 2 ? hz : -hz;
    const bool normal = component_axis(c) == axis;
    const bool keeps_phase = is_electric(c) != normal;
    return keeps_phase ? phase : -phase;
}

double PulseShape::value(double t) const
{
    if (t > cutoff || t < 0.0)
    {
        return 0.0;
    }
    const double u = (t - peak_time) / width;
    return amplitude * std::exp(-0.5 * u * u) * std::sin(2.0 * kPi * frequency * (t - peak_time));
}

PulseShape make_pulse(const SourceSpec &source, double a_nm)
{
    if (!(source.center_wavelength_nm > 0.0) || !(source.bandwidth_nm > 0.0))
    {
        throw SetupError("source wavelength and bandwidth must be positive");
    }
    PulseShape p;
    p.frequency = a_nm / source.center_wavelength_nm;
    const double df = a_nm * source.bandwidth_nm / (source.center_wavelength_nm * source.center_wavelength_nm);
    const double sigma_f = df / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    p.width = 1.0 / (2.0 * kPi * sigma_f);
    p.peak_time = 5.0 * p.width;
    p.cutoff = source.start_cutoff_fs ? fs_to_normalized_time(*source.start_cutoff_fs, a_nm) : 2.0 * p.peak_time;
    p.amplitude = source.amplitude;
    return p;
}

double SimulationConfig::dt_fs() const { return normalized_time_to_fs(dt(), a_nm); }

void SimulationConfig::validate() const
{
    if (!grid)
    {
        throw SetupError("simulation has no permittivity grid");
    }
    if (grid->dims.size() == 0 || !(grid->dx_nm > 0.0))
    {
        throw SetupError("permittivity grid is empty");
    }
    if (!(a_nm > 0.0))
    {
        throw SetupError("length unit a must be positive");
    }
    if (!(courant > 0.0) || courant > 1.0 / std::sqrt(3.0))
    {
        std::ostringstream os;
        os << "Courant factor " << courant << " outside (0, 1/sqrt(3)]";
        throw SetupError(os.str());
    }
    if (steps < 0)
    {
        throw SetupError("step count must be non-negative");
    }
    cpml.validate();
    for (int d = 0; d < 3; ++d)
    {
        if (periodic[d] && symmetry.active(d))
        {
            throw SetupError("an axis cannot be both periodic and mirrored");
        }
        const int n = grid->dims.extent(d);
        const int walls = reduced[d] ? 1 : 2;
        if (!periodic[d] && cpml.thickness > 0 && n <= walls * cpml.thickness)
        {
            throw SetupError("grid too small for the absorber thickness");
        }
    }
    for (const auto &m : monitors)
    {
        if (m.decimation < 1 || m.start_step < 0)
        {
            throw SetupError("monitor '" + m.name + "' needs decimation >= 1 and start_step >= 0");
        }
        if (m.components.empty())
        {
            throw SetupError("monitor '" + m.name + "' selects no components");
        }
    }
    for (const auto &d : dfts)
    {
        if (d.stride < 1 || d.start_step < 0)
        {
            throw SetupError("DFT accumulator needs stride >= 1 and start_step >= 0");
        }
    }
}

} // namespace phc
