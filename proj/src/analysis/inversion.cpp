#include "phc/analysis.hpp"
#include "phc/errors.hpp"
#include "phc/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace phc
{
namespace
{
using cd = std::complex<double>;

// Kaiser-windowed sinc low-pass; cutoff in cycles per sample, unit DC gain.
std::vector<double> kaiser_lowpass(double cutoff, double transition, double attenuation_db)
{
    const double beta = attenuation_db > 50.0 ? 0.1102 * (attenuation_db - 8.7)
                                              : 0.5842 * std::pow(attenuation_db - 21.0, 0.4) +
                                                    0.07886 * (attenuation_db - 21.0);
    int taps = static_cast<int>(std::ceil((attenuation_db - 7.95) / (2.285 * 2.0 * kPi * transition))) + 1;
    taps |= 1;
    std::vector<double> h(static_cast<std::size_t>(taps));
    const double mid = 0.5 * (taps - 1);
    const double norm = std::cyl_bessel_i(0.0, beta);
    double sum = 0.0;
    for (int j = 0; j < taps; ++j)
    {
        const double x = j - mid;
        const double sinc = x == 0.0 ? 2.0 * cutoff : std::sin(2.0 * kPi * cutoff * x) / (kPi * x);
        const double r = taps > 1 ? (j - mid) / mid : 0.0;
        const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
        h[j] = sinc * w;
        sum += h[j];
    }
    for (double &v : h)
    {
        v /= sum;
    }
    return h;
}

// H(z) = sum_j h_j z^-j for a per-sample pole z = exp(s).
cd filter_response(const std::vector<double> &h, cd s)
{
    cd acc{0.0, 0.0};
    const cd step = std::exp(-s);
    cd zj{1.0, 0.0};
    for (double v : h)
    {
        acc += v * zj;
        zj *= step;
    }
    return acc;
}

} // namespace

ResonantMode ResonantMode::from_pole(double frequency_per_fs, double decay_per_fs, double amplitude, double phase)
{
    ResonantMode m;
    m.wavelength_nm = kSpeedOfLightNmPerFs / frequency_per_fs;
    m.decay_rate = decay_per_fs;
    m.Q = kPi * frequency_per_fs / decay_per_fs;
    m.amplitude = amplitude;
    m.phase = phase;
    m.validate();
    return m;
}

double ResonantMode::frequency_per_fs() const { return kSpeedOfLightNmPerFs / wavelength_nm; }

void ResonantMode::validate() const
{
    if (!(Q > 0.0) || !(wavelength_nm > 0.0) || !(decay_rate > 0.0))
    {
        throw NumericsError("resonant mode needs Q > 0, wavelength > 0 and a positive decay rate");
    }
    const double expected = kPi * frequency_per_fs() / decay_rate;
    if (std::abs(expected - Q) > 1e-9 * Q)
    {
        throw NumericsError("resonant mode Q is inconsistent with its decay rate");
    }
}

InversionResult harmonic_inversion(std::span<const double> series, double dt_fs, std::array<double, 2> band_nm,
                                   double t0_fs, const InversionOptions &options)
{
    if (!(dt_fs > 0.0) || !(band_nm[0] > 0.0) || !(band_nm[1] > band_nm[0]))
    {
        throw NumericsError("harmonic inversion needs dt > 0 and 0 < lambda_min < lambda_max");
    }
    const double f_lo = kSpeedOfLightNmPerFs / band_nm[1];
    const double f_hi = kSpeedOfLightNmPerFs / band_nm[0];
    if (f_hi >= 0.5 / dt_fs)
    {
        throw NumericsError("band reaches beyond the Nyquist frequency of the series");
    }
    InversionResult result;
    const std::size_t n = series.size();
    double raw_energy = 0.0;
    for (double v : series)
    {
        raw_energy += v * v;
    }
    if (raw_energy == 0.0)
    {
        return result;
    }
    if (n < 1000)
    {
        throw NumericsError("harmonic inversion needs at least 1000 samples, got " + std::to_string(n));
    }

    const double fc = 0.5 * (f_lo + f_hi);
    const double half = 0.5 * (f_hi - f_lo);
    // Decimated rate ~4x the half band: passband |f| < half, stopband beyond 3 half.
    // Short records decimate less; the wider alias-free transition then keeps the
    // filter short enough to leave at least kMinDecimated output samples.
    constexpr std::size_t kMinDecimated = 128;
    int D = std::max(1, static_cast<int>(std::floor(1.0 / (4.0 * half * dt_fs))));
    std::vector<double> h;
    for (;; --D)
    {
        const double transition = (1.0 / (D * dt_fs) - 2.0 * half) * dt_fs;
        const double cutoff = std::min(0.45, half * dt_fs + 0.5 * transition);
        h = kaiser_lowpass(cutoff, transition, 140.0);
        if (h.size() + kMinDecimated * static_cast<std::size_t>(D) <= n)
        {
            break;
        }
        if (D == 1)
        {
            throw NumericsError("series too short for the requested band");
        }
    }
    const std::size_t taps = h.size();

    // Work on a normalized copy so results do not depend on the overall scale.
    double scale = 0.0;
    for (double v : series)
    {
        scale = std::max(scale, std::abs(v));
    }
    std::vector<cd> x(n);
    for (std::size_t m = 0; m < n; ++m)
    {
        x[m] = (series[m] / scale) * std::polar(1.0, -2.0 * kPi * fc * (t0_fs + static_cast<double>(m) * dt_fs));
    }
    const std::size_t n0 = taps - 1;
    std::size_t count = (n - 1 - n0) / static_cast<std::size_t>(D) + 1;
    count = std::min<std::size_t>(count, static_cast<std::size_t>(options.max_samples));
    Eigen::VectorXcd w(static_cast<Eigen::Index>(count));
    double filtered_energy = 0.0;
    for (std::size_t l = 0; l < count; ++l)
    {
        const std::size_t m = n0 + l * static_cast<std::size_t>(D);
        cd acc{0.0, 0.0};
        for (std::size_t j = 0; j < taps; ++j)
        {
            acc += h[j] * x[m - j];
        }
        w[static_cast<Eigen::Index>(l)] = acc;
        filtered_energy += std::norm(acc);
    }
    // Nothing in the band beyond filter leakage.
    const double raw_per_sample = raw_energy / (scale * scale) / static_cast<double>(n);
    const double filtered_per_sample = filtered_energy / static_cast<double>(count);
    if (filtered_per_sample <= 1e-14 * raw_per_sample)
    {
        return result;
    }

    const Eigen::Index N = w.size();
    const Eigen::Index L = std::clamp<Eigen::Index>(N / 3, 2, 400);
    Eigen::MatrixXcd Y(N - L, L + 1);
    for (Eigen::Index r = 0; r < N - L; ++r)
    {
        for (Eigen::Index c = 0; c <= L; ++c)
        {
            Y(r, c) = w[r + c];
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(Y, Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    Eigen::Index M = 0;
    while (M < sv.size() && sv[M] > options.rank_tolerance * sv[0])
    {
        ++M;
    }
    M = std::min<Eigen::Index>(M, L - 1);
    if (M == 0)
    {
        return result;
    }
    result.conditioning = sv[M - 1] / sv[0];
    if (M == L - 1 && M + 1 < sv.size() && sv[M] > options.rank_tolerance * sv[0])
    {
        result.warning = "signal rank reached the pencil size; fit may be noise-dominated";
    }
    const Eigen::MatrixXcd V = svd.matrixV().leftCols(M);
    const Eigen::MatrixXcd A = V.topRows(L).adjoint();
    const Eigen::MatrixXcd B = V.bottomRows(L).adjoint();
    const Eigen::MatrixXcd P = B * A.completeOrthogonalDecomposition().pseudoInverse();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(P, false);
    if (eig.info() != Eigen::Success)
    {
        throw NumericsError("pencil eigenvalue problem did not converge");
    }
    const Eigen::VectorXcd Z = eig.eigenvalues();

    // Amplitudes: least squares on the decimated Vandermonde system.
    Eigen::MatrixXcd vand(N, M);
    for (Eigen::Index k = 0; k < M; ++k)
    {
        cd p{1.0, 0.0};
        for (Eigen::Index l = 0; l < N; ++l)
        {
            vand(l, k) = p;
            p *= Z[k];
        }
    }
    const Eigen::VectorXcd b = vand.colPivHouseholderQr().solve(w);
    double vand_cond = 1.0;
    {
        Eigen::JacobiSVD<Eigen::MatrixXcd> vs(vand);
        const auto &s = vs.singularValues();
        vand_cond = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : std::numeric_limits<double>::infinity();
    }
    if (vand_cond > 1e10 && !result.warning)
    {
        std::ostringstream os;
        os << "ill-conditioned amplitude fit (condition number " << vand_cond << ")";
        result.warning = os.str();
    }

    std::vector<ResonantMode> modes;
    for (Eigen::Index k = 0; k < M; ++k)
    {
        if (std::abs(Z[k]) == 0.0)
        {
            continue;
        }
        // per-sample pole of the baseband signal
        const cd s = std::log(Z[k]) / static_cast<double>(D);
        const double decay = -s.real() / dt_fs;
        const double f = fc + s.imag() / (2.0 * kPi * dt_fs);
        if (!(decay > 0.0) || f < f_lo || f > f_hi)
        {
            continue;
        }
        const double Q = kPi * f / decay;
        if (Q < options.min_q)
        {
            continue;
        }
        const cd Hz = filter_response(h, s);
        cd c = b[k] / (Hz * std::exp(s * static_cast<double>(n0)));
        // refer to t = 0: c = (A/2) e^{i phi} e^{s t0 / dt}
        c *= std::exp(-s * (t0_fs / dt_fs));
        modes.push_back(ResonantMode::from_pole(f, decay, 2.0 * scale * std::abs(c), std::arg(c)));
    }
    double peak = 0.0;
    for (const auto &m : modes)
    {
        peak = std::max(peak, m.amplitude);
    }
    std::erase_if(modes, [&](const ResonantMode &m) { return m.amplitude < options.min_relative_amplitude * peak; });
    std::sort(modes.begin(), modes.end(),
              [](const ResonantMode &a, const ResonantMode &b) { return a.amplitude > b.amplitude; });
    result.modes = std::move(modes);
    return result;
}

} // namespace phc
