#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phc
{
// Triangular lattice of circular holes in a uniform background (2D effective-index model).
struct Lattice2D
{
    double a_nm = 214.0;
    double r_nm = 0.285 * 214.0;
    double eps_bg = 1.0;
    double eps_hole = 1.0;

    void validate() const;
    // Hole area over unit-cell area, 2 pi r^2 / (sqrt(3) a^2).
    double fill_fraction() const;
};

// Wave vectors are in units of 1/a (2 pi included).
using Vec2 = std::array<double, 2>;

// G = h b1 + k b2 with b1 = 2 pi (1, -1/sqrt(3)), b2 = 2 pi (0, 2/sqrt(3)).
Vec2 reciprocal_vector(int h, int k);

// Plane waves inside the hexagon max(|h|, |k|, |h - k|) <= n: 3 n (n + 1) + 1 of them.
std::vector<Vec2> hexagonal_basis(int n_waves);
int hexagonal_basis_size(int shells);

double fourier_eps(const Lattice2D &lattice, Vec2 G);
// Transform of 1/eps, used by the direct rule.
double fourier_inverse_eps(const Lattice2D &lattice, Vec2 G);

enum class ExpansionRule
{
    // invert the truncated matrix of eps coefficients (faster TE convergence)
    kInverse,
    // transform 1/eps directly
    kDirect
};
std::string rule_name(ExpansionRule rule);

struct KPath
{
    std::vector<std::string> labels;
    std::vector<Vec2> vertices;
    int samples_per_segment = 10;

    static KPath gamma_m_k_gamma(int samples_per_segment);
    // Sampled points and their fractional position along the path.
    std::vector<Vec2> points() const;
    std::vector<double> fractions() const;
};

Vec2 point_gamma();
Vec2 point_m();
Vec2 point_k();

struct BandOptions
{
    int n_bands = 8;
    ExpansionRule rule = ExpansionRule::kInverse;
    int workers = 1;
};

struct Gap
{
    double lo = 0.0;
    double hi = 0.0;
    // index of the band below the gap (0-based)
    int lower_band = 0;
};

struct BandDiagram
{
    std::vector<Vec2> k;
    std::vector<double> k_fraction;
    // frequencies[k][band] in a / lambda, ascending per k
    std::vector<std::vector<double>> frequencies;
    std::vector<Gap> gaps;
    int n_waves = 0;
    ExpansionRule rule = ExpansionRule::kInverse;
    // Smallest eigenvalue (omega a / c)^2 seen before clamping.
    double min_eigenvalue = 0.0;
};

// TE (H along the hole axis) eigenfrequencies at one k, a / lambda ascending.
std::vector<double> te_frequencies(const Lattice2D &lattice, int n_waves, Vec2 k, const BandOptions &options = {});

BandDiagram te_bands(const Lattice2D &lattice, int n_waves, const KPath &path, const BandOptions &options = {});

// Complete gaps between consecutive bands over all sampled k.
std::vector<Gap> find_gaps(const std::vector<std::vector<double>> &frequencies);

struct GapRow
{
    double r_over_a = 0.0;
    // gap above the first TE band, if any
    std::optional<Gap> gap;
};

std::vector<GapRow> gap_map(const Lattice2D &base, std::span<const double> r_over_a, int n_waves, const KPath &path,
                            const BandOptions &options = {});

// Effective index of the fundamental TE mode of a symmetric air-clad slab.
double slab_effective_index(double n_slab, double thickness_nm, double wavelength_nm);

void write_bands_csv(const std::string &path, const BandDiagram &diagram);
void write_gaps_csv(const std::string &path, std::span<const GapRow> rows);

} // namespace phc
