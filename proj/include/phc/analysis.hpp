#pragma once

#include "phc/field.hpp"
#include "phc/geometry.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phc
{
// One damped oscillation a * exp(-decay t) * cos(2 pi f t + phase), f = c / wavelength.
struct ResonantMode
{
    double wavelength_nm = 0.0;
    double Q = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    // Amplitude decay rate in 1/fs.
    double decay_rate = 0.0;

    // Builds a mode from frequency (1/fs) and decay rate; Q = pi f / decay.
    static ResonantMode from_pole(double frequency_per_fs, double decay_per_fs, double amplitude, double phase);
    double frequency_per_fs() const;
    // Throws NumericsError if the Q / decay / wavelength relation does not hold.
    void validate() const;
};

struct InversionOptions
{
    // Singular values below this fraction of the largest are treated as noise.
    double rank_tolerance = 1e-10;
    double min_q = 10.0;
    double min_relative_amplitude = 1e-6;
    // Cap on decimated samples fed to the pencil.
    int max_samples = 3000;
};

struct InversionResult
{
    std::vector<ResonantMode> modes;
    // Ratio of the smallest kept to the largest singular value.
    double conditioning = 1.0;
    std::optional<std::string> warning;
};

// Fits damped sinusoids in the band [lambda_min, lambda_max] nm. Samples are
// taken at t = t0_fs + n dt_fs. The band is shifted to baseband, low-pass
// filtered and decimated, then a matrix pencil gives the poles.
InversionResult harmonic_inversion(std::span<const double> series, double dt_fs,
                                   std::array<double, 2> band_nm, double t0_fs = 0.0,
                                   const InversionOptions &options = {});

enum class Window
{
    kRectangular,
    kHann
};

std::string window_name(Window w);
Window parse_window(const std::string &name);

enum class SpectralQuantity
{
    kMagnitude,
    kPower
};

struct Spectrum
{
    // Strictly increasing.
    std::vector<double> wavelength_nm;
    std::vector<double> amplitude;
    // Matching frequencies in 1/fs (decreasing) and the bin width.
    std::vector<double> frequency_per_fs;
    double bin_width_per_fs = 0.0;
    Window window = Window::kRectangular;
    SpectralQuantity quantity = SpectralQuantity::kMagnitude;

    void validate() const;
};

struct SpectrumOptions
{
    Window window = Window::kRectangular;
    SpectralQuantity quantity = SpectralQuantity::kMagnitude;
    // Zero-padding factor applied before the transform.
    int padding = 1;
    // Optional wavelength range in nm; empty keeps every positive-frequency bin.
    std::optional<std::array<double, 2>> band_nm;
};

// |dt * DFT(w s)| (or its square) at the positive-frequency bins, ordered by wavelength.
Spectrum spectrum_from_series(std::span<const double> series, double dt_fs, const SpectrumOptions &options = {});

struct LorentzianFit
{
    double lambda0_nm = 0.0;
    double fwhm_nm = 0.0;
    double Q = 0.0;
    double peak = 0.0;
    double background = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
};

struct FitOptions
{
    int max_iterations = 200;
    // Fit window half-width in multiples of the initial FWHM estimate; 0 uses the whole spectrum.
    double window_fwhm = 0.0;
};

// Least-squares fit of A (G/2)^2 / ((l - l0)^2 + (G/2)^2) + B.
LorentzianFit lorentzian_fit(const Spectrum &spectrum, double guess_nm, const FitOptions &options = {});

struct ModeVolumeResult
{
    double Vm_physical_nm3 = 0.0;
    double Vm_normalized = 0.0;
    std::array<double, 3> peak_location_nm{};
};

// Vm = sum(eps |E|^2) dV / max(eps |E|^2), all three components taken at their
// own Yee samples and summed per cell.
ModeVolumeResult mode_volume(const PermittivityGrid &eps, const VectorField &field, double wavelength_nm,
                             double n);

double purcell_factor(double Q, double Vm_normalized);

struct ModeRow
{
    ResonantMode mode;
    std::optional<double> Vm_normalized;
    std::optional<double> purcell;
};

void write_modes_csv(const std::string &path, std::span<const ModeRow> rows);
void write_spectrum_csv(const std::string &path, const Spectrum &spectrum);

} // namespace phc
