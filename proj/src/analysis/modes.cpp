#include "phc/analysis.hpp"
#include "phc/errors.hpp"
#include "phc/units.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace phc
{
ModeVolumeResult mode_volume(const PermittivityGrid &eps, const VectorField &field, double wavelength_nm, double n)
{
    if (!(field.dims == eps.dims))
    {
        throw NumericsError("mode volume: field and permittivity grids differ in size");
    }
    if (!(wavelength_nm > 0.0) || !(n > 0.0))
    {
        throw NumericsError("mode volume needs a positive wavelength and index");
    }
    const GridDims &d = eps.dims;
    // compensated sum keeps the result insensitive to a global rescaling
    double total = 0.0;
    double carry = 0.0;
    double peak = 0.0;
    std::size_t peak_at = 0;
    for (std::size_t idx = 0; idx < d.size(); ++idx)
    {
        double u = 0.0;
        for (int c = 0; c < 3; ++c)
        {
            u += eps.eps[c][idx] * std::norm(field.e[c][idx]);
        }
        const double t = total + u;
        carry += std::abs(total) >= std::abs(u) ? (total - t) + u : (u - t) + total;
        total = t;
        if (u > peak)
        {
            peak = u;
            peak_at = idx;
        }
    }
    if (peak == 0.0)
    {
        throw NumericsError("mode volume is undefined for an all-zero field");
    }
    total += carry;
    ModeVolumeResult r;
    const double cell = eps.dx_nm * eps.dx_nm * eps.dx_nm;
    r.Vm_physical_nm3 = total / peak * cell;
    const double unit = wavelength_nm / n;
    r.Vm_normalized = r.Vm_physical_nm3 / (unit * unit * unit);
    const int i = static_cast<int>(peak_at / (static_cast<std::size_t>(d.ny) * d.nz));
    const int j = static_cast<int>((peak_at / d.nz) % d.ny);
    const int k = static_cast<int>(peak_at % d.nz);
    r.peak_location_nm = {eps.origin_nm[0] + i * eps.dx_nm, eps.origin_nm[1] + j * eps.dx_nm,
                          eps.origin_nm[2] + k * eps.dx_nm};
    return r;
}

double purcell_factor(double Q, double Vm_normalized)
{
    if (!(Q > 0.0) || !(Vm_normalized > 0.0))
    {
        throw NumericsError("Purcell factor needs Q > 0 and Vm > 0");
    }
    return 3.0 / (4.0 * kPi * kPi) * Q / Vm_normalized;
}

void write_modes_csv(const std::string &path, std::span<const ModeRow> rows)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path);
    }
    bool with_vm = false;
    bool with_f = false;
    for (const auto &r : rows)
    {
        with_vm = with_vm || r.Vm_normalized.has_value();
        with_f = with_f || r.purcell.has_value();
    }
    out << "wavelength_nm,Q,amplitude,phase_rad";
    if (with_vm)
    {
        out << ",Vm_lambda_n3";
    }
    if (with_f)
    {
        out << ",purcell";
    }
    out << '\n' << std::setprecision(10);
    for (const auto &r : rows)
    {
        out << r.mode.wavelength_nm << ',' << r.mode.Q << ',' << r.mode.amplitude << ',' << r.mode.phase;
        if (with_vm)
        {
            out << ',';
            if (r.Vm_normalized)
            {
                out << *r.Vm_normalized;
            }
        }
        if (with_f)
        {
            out << ',';
            if (r.purcell)
            {
                out << *r.purcell;
            }
        }
        out << '\n';
    }
}

void write_spectrum_csv(const std::string &path, const Spectrum &spectrum)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path);
    }
    out << "wavelength_nm,amplitude\n" << std::setprecision(12);
    for (std::size_t i = 0; i < spectrum.wavelength_nm.size(); ++i)
    {
        out << spectrum.wavelength_nm[i] << ',' << spectrum.amplitude[i] << '\n';
    }
}

} // namespace phc
