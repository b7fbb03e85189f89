#include "phc/analysis.hpp"
#include "phc/errors.hpp"
#include "phc/units.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>

namespace phc
{
std::string window_name(Window w) { return w == Window::kHann ? "hann" : "rectangular"; }

Window parse_window(const std::string &name)
{
    if (name == "hann")
    {
        return Window::kHann;
    }
    if (name == "rectangular")
    {
        return Window::kRectangular;
    }
    throw std::invalid_argument("unknown window '" + name + "'");
}

void Spectrum::validate() const
{
    if (wavelength_nm.size() != amplitude.size())
    {
        throw NumericsError("spectrum wavelength and amplitude sizes differ");
    }
    for (std::size_t i = 1; i < wavelength_nm.size(); ++i)
    {
        if (!(wavelength_nm[i] > wavelength_nm[i - 1]))
        {
            throw NumericsError("spectrum wavelengths must increase strictly");
        }
    }
}

Spectrum spectrum_from_series(std::span<const double> series, double dt_fs, const SpectrumOptions &options)
{
    if (series.empty())
    {
        throw NumericsError("spectrum of an empty series");
    }
    if (!(dt_fs > 0.0) || options.padding < 1)
    {
        throw NumericsError("spectrum needs dt > 0 and padding >= 1");
    }
    const std::size_t n = series.size();
    const std::size_t total = n * static_cast<std::size_t>(options.padding);
    const std::size_t bins = total / 2 + 1;

    struct FftwFree
    {
        void operator()(void *p) const { fftw_free(p); }
    };
    std::unique_ptr<double, FftwFree> in(fftw_alloc_real(total));
    std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(bins));
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(total), in.get(), out.get(), FFTW_ESTIMATE);
    for (std::size_t i = 0; i < total; ++i)
    {
        double w = 0.0;
        if (i < n)
        {
            w = 1.0;
            if (options.window == Window::kHann && n > 1)
            {
                w = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1)));
            }
            w *= series[i];
        }
        in.get()[i] = w;
    }
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    Spectrum s;
    s.window = options.window;
    s.quantity = options.quantity;
    s.bin_width_per_fs = 1.0 / (static_cast<double>(total) * dt_fs);
    // increasing wavelength = decreasing frequency
    for (std::size_t k = bins - 1; k >= 1; --k)
    {
        const double f = static_cast<double>(k) * s.bin_width_per_fs;
        const double lambda = kSpeedOfLightNmPerFs / f;
        if (options.band_nm && (lambda < (*options.band_nm)[0] || lambda > (*options.band_nm)[1]))
        {
            continue;
        }
        const std::complex<double> X(out.get()[k][0], out.get()[k][1]);
        const double mag = dt_fs * std::abs(X);
        s.wavelength_nm.push_back(lambda);
        s.frequency_per_fs.push_back(f);
        s.amplitude.push_back(options.quantity == SpectralQuantity::kPower ? mag * mag : mag);
    }
    return s;
}

} // namespace phc
