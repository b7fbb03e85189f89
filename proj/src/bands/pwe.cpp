#include "phc/bands.hpp"
#include "phc/errors.hpp"
#include "phc/parallel.hpp"
#include "phc/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace phc
{
namespace
{
const double kSqrt3 = std::sqrt(3.0);

// 2 J1(x) / x, with its limit 1 at x = 0
double airy_factor(double x) { return x < 1e-12 ? 1.0 : 2.0 * std::cyl_bessel_j(1.0, x) / x; }

Eigen::MatrixXd coefficient_matrix(const Lattice2D &lattice, const std::vector<Vec2> &basis, ExpansionRule rule)
{
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const Vec2 d{basis[i][0] - basis[j][0], basis[i][1] - basis[j][1]};
            m(i, j) = rule == ExpansionRule::kInverse ? fourier_eps(lattice, d) : fourier_inverse_eps(lattice, d);
        }
    }
    if (rule == ExpansionRule::kInverse)
    {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
        if (ldlt.info() != Eigen::Success)
        {
            throw NumericsError("permittivity coefficient matrix is singular");
        }
        Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
        m = 0.5 * (inv + inv.transpose());
    }
    return m;
}

struct Solved
{
    std::vector<double> freq;
    double min_eig;
};

Solved solve_k(const Eigen::MatrixXd &eta, const std::vector<Vec2> &basis, Vec2 k, int n_bands, std::size_t k_index)
{
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double ax = k[0] + basis[i][0];
        const double ay = k[1] + basis[i][1];
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const double bx = k[0] + basis[j][0];
            const double by = k[1] + basis[j][1];
            m(i, j) = eta(i, j) * (ax * bx + ay * by);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
    {
        throw NumericsError("band eigensolver did not converge at k-point " + std::to_string(k_index));
    }
    const auto &ev = es.eigenvalues();
    Solved s;
    s.min_eig = ev[0];
    if (ev[0] < -1e-10)
    {
        std::ostringstream os;
        os << "negative eigenvalue " << ev[0] << " at k-point " << k_index;
        throw NumericsError(os.str());
    }
    const int count = std::min<int>(n_bands, static_cast<int>(n));
    for (int b = 0; b < count; ++b)
    {
        s.freq.push_back(std::sqrt(std::max(0.0, ev[b])) / (2.0 * kPi));
    }
    return s;
}

} // namespace

void Lattice2D::validate() const
{
    if (!(a_nm > 0.0) || !(r_nm >= 0.0) || !(r_nm < 0.5 * a_nm))
    {
        throw GeometryError("2D lattice needs 0 <= r < a/2");
    }
    if (!(eps_bg >= 1.0) || !(eps_hole >= 1.0))
    {
        throw GeometryError("2D lattice permittivities must be >= 1");
    }
}

double Lattice2D::fill_fraction() const { return 2.0 * kPi * r_nm * r_nm / (kSqrt3 * a_nm * a_nm); }

Vec2 reciprocal_vector(int h, int k)
{
    return {2.0 * kPi * h, 2.0 * kPi * (-h / kSqrt3 + 2.0 * k / kSqrt3)};
}

int hexagonal_basis_size(int shells) { return 3 * shells * (shells + 1) + 1; }

std::vector<Vec2> hexagonal_basis(int n_waves)
{
    if (n_waves < 7)
    {
        throw NumericsError("plane-wave basis needs at least 7 waves");
    }
    int shells = 1;
    while (hexagonal_basis_size(shells) < n_waves)
    {
        ++shells;
    }
    std::vector<Vec2> g;
    for (int h = -shells; h <= shells; ++h)
    {
        for (int k = -shells; k <= shells; ++k)
        {
            if (std::abs(h - k) <= shells)
            {
                g.push_back(reciprocal_vector(h, k));
            }
        }
    }
    return g;
}

double fourier_eps(const Lattice2D &lattice, Vec2 G)
{
    const double f = lattice.fill_fraction();
    const double g = std::hypot(G[0], G[1]);
    if (g < 1e-12)
    {
        return lattice.eps_bg + f * (lattice.eps_hole - lattice.eps_bg);
    }
    return (lattice.eps_hole - lattice.eps_bg) * f * airy_factor(g * lattice.r_nm / lattice.a_nm);
}

double fourier_inverse_eps(const Lattice2D &lattice, Vec2 G)
{
    const double f = lattice.fill_fraction();
    const double g = std::hypot(G[0], G[1]);
    const double hole = 1.0 / lattice.eps_hole;
    const double bg = 1.0 / lattice.eps_bg;
    if (g < 1e-12)
    {
        return bg + f * (hole - bg);
    }
    return (hole - bg) * f * airy_factor(g * lattice.r_nm / lattice.a_nm);
}

std::string rule_name(ExpansionRule rule) { return rule == ExpansionRule::kInverse ? "inverse" : "direct"; }

Vec2 point_gamma() { return {0.0, 0.0}; }
Vec2 point_m() { return {0.0, 2.0 * kPi / kSqrt3}; }
Vec2 point_k() { return {2.0 * kPi / 3.0, 2.0 * kPi / kSqrt3}; }

KPath KPath::gamma_m_k_gamma(int samples_per_segment)
{
    KPath p;
    p.labels = {"G", "M", "K", "G"};
    p.vertices = {point_gamma(), point_m(), point_k(), point_gamma()};
    p.samples_per_segment = samples_per_segment;
    return p;
}

std::vector<Vec2> KPath::points() const
{
    std::vector<Vec2> out;
    for (std::size_t s = 0; s + 1 < vertices.size(); ++s)
    {
        for (int i = 0; i < samples_per_segment; ++i)
        {
            const double t = static_cast<double>(i) / samples_per_segment;
            out.push_back({vertices[s][0] + t * (vertices[s + 1][0] - vertices[s][0]),
                           vertices[s][1] + t * (vertices[s + 1][1] - vertices[s][1])});
        }
    }
    if (!vertices.empty())
    {
        out.push_back(vertices.back());
    }
    return out;
}

std::vector<double> KPath::fractions() const
{
    const auto pts = points();
    std::vector<double> out(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
    {
        out[i] = out[i - 1] + std::hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);
    }
    if (!out.empty() && out.back() > 0.0)
    {
        const double total = out.back();
        for (double &v : out)
        {
            v /= total;
        }
    }
    return out;
}

std::vector<double> te_frequencies(const Lattice2D &lattice, int n_waves, Vec2 k, const BandOptions &options)
{
    lattice.validate();
    const auto basis = hexagonal_basis(n_waves);
    const auto eta = coefficient_matrix(lattice, basis, options.rule);
    return solve_k(eta, basis, k, options.n_bands, 0).freq;
}

std::vector<Gap> find_gaps(const std::vector<std::vector<double>> &frequencies)
{
    std::vector<Gap> gaps;
    if (frequencies.empty())
    {
        return gaps;
    }
    const std::size_t bands = frequencies.front().size();
    for (std::size_t b = 0; b + 1 < bands; ++b)
    {
        double top = -1.0;
        double bottom = 1e300;
        for (const auto &f : frequencies)
        {
            top = std::max(top, f[b]);
            bottom = std::min(bottom, f[b + 1]);
        }
        if (bottom > top)
        {
            gaps.push_back({top, bottom, static_cast<int>(b)});
        }
    }
    return gaps;
}

BandDiagram te_bands(const Lattice2D &lattice, int n_waves, const KPath &path, const BandOptions &options)
{
    lattice.validate();
    const auto basis = hexagonal_basis(n_waves);
    const auto eta = coefficient_matrix(lattice, basis, options.rule);
    BandDiagram d;
    d.k = path.points();
    d.k_fraction = path.fractions();
    d.n_waves = static_cast<int>(basis.size());
    d.rule = options.rule;
    std::vector<Solved> solved(d.k.size());
    WorkerPool pool(resolve_worker_count(options.workers));
    pool.parallel_for(0, static_cast<int>(d.k.size()), [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i)
        {
            solved[i] = solve_k(eta, basis, d.k[i], options.n_bands, static_cast<std::size_t>(i));
        }
    });
    d.min_eigenvalue = 1e300;
    for (auto &s : solved)
    {
        d.min_eigenvalue = std::min(d.min_eigenvalue, s.min_eig);
        d.frequencies.push_back(std::move(s.freq));
    }
    d.gaps = find_gaps(d.frequencies);
    return d;
}

std::vector<GapRow> gap_map(const Lattice2D &base, std::span<const double> r_over_a, int n_waves, const KPath &path,
                            const BandOptions &options)
{
    for (std::size_t i = 1; i < r_over_a.size(); ++i)
    {
        if (!(r_over_a[i] > r_over_a[i - 1]))
        {
            throw GeometryError("gap map needs increasing r/a samples");
        }
    }
    std::vector<GapRow> rows;
    for (double ra : r_over_a)
    {
        Lattice2D l = base;
        l.r_nm = ra * base.a_nm;
        GapRow row;
        row.r_over_a = ra;
        if (ra > 0.0)
        {
            const auto d = te_bands(l, n_waves, path, options);
            for (const auto &g : d.gaps)
            {
                if (g.lower_band == 0)
                {
                    row.gap = g;
                }
            }
        }
        rows.push_back(row);
    }
    return rows;
}

double slab_effective_index(double n_slab, double thickness_nm, double wavelength_nm)
{
    if (!(n_slab > 1.0) || !(thickness_nm > 0.0) || !(wavelength_nm > 0.0))
    {
        throw NumericsError("slab effective index needs n > 1, thickness > 0, wavelength > 0");
    }
    // even TE mode: u tan u = w, u^2 + w^2 = V^2
    const double k0h = kPi * thickness_nm / wavelength_nm;  // k0 * H / 2
    const double V = k0h * std::sqrt(n_slab * n_slab - 1.0);
    double lo = 0.0;
    double hi = std::min(V, 0.5 * kPi - 1e-15);
    for (int it = 0; it < 200; ++it)
    {
        const double u = 0.5 * (lo + hi);
        const double g = u * std::tan(u) - std::sqrt(std::max(0.0, V * V - u * u));
        (g > 0.0 ? hi : lo) = u;
    }
    const double u = 0.5 * (lo + hi);
    return std::sqrt(n_slab * n_slab - (u / k0h) * (u / k0h));
}

void write_bands_csv(const std::string &path, const BandDiagram &diagram)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path);
    }
    out << "k_index,k_frac_path,band_index,a_over_lambda\n" << std::setprecision(12);
    for (std::size_t i = 0; i < diagram.k.size(); ++i)
    {
        for (std::size_t b = 0; b < diagram.frequencies[i].size(); ++b)
        {
            out << i << ',' << diagram.k_fraction[i] << ',' << b << ',' << diagram.frequencies[i][b] << '\n';
        }
    }
}

void write_gaps_csv(const std::string &path, std::span<const GapRow> rows)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path);
    }
    out << "r_over_a,gap_lo,gap_hi\n" << std::setprecision(12);
    for (const auto &r : rows)
    {
        out << r.r_over_a << ',';
        if (r.gap)
        {
            out << r.gap->lo << ',' << r.gap->hi;
        }
        else
        {
            out << ',';
        }
        out << '\n';
    }
}

} // namespace phc
