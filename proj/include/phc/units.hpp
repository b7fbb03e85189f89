#pragma once

#include <numbers>

namespace phc
{
// Vacuum light speed in nm per femtosecond.
inline constexpr double kSpeedOfLightNmPerFs = 299.792458;

inline constexpr double kPi = std::numbers::pi;

// Internally every simulation uses lengths in units of the lattice constant a
// and times in units of a/c, so a frequency f is a/lambda.
inline double wavelength_to_normalized_frequency(double wavelength_nm, double a_nm)
{
    return a_nm / wavelength_nm;
}

inline double normalized_frequency_to_wavelength(double f, double a_nm)
{
    return a_nm / f;
}

inline double normalized_time_to_fs(double t, double a_nm)
{
    return t * a_nm / kSpeedOfLightNmPerFs;
}

inline double fs_to_normalized_time(double t_fs, double a_nm)
{
    return t_fs * kSpeedOfLightNmPerFs / a_nm;
}

} // namespace phc
