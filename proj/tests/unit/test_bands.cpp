#include "phc/bands.hpp"
#include "phc/errors.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

using namespace phc;

namespace
{
const double kPi = std::numbers::pi;

Lattice2D diamond_lattice(int)
{
    Lattice2D l;
    l.a_nm = 214.0;
    l.r_nm = 0.285 * 214.0;
    const double n = slab_effective_index(2.4, 214.0, 637.0);
    l.eps_bg = n * n;
    l.eps_hole = 1.0;
    return l;
}

Vec2 rotate60(Vec2 k)
{
    const double c = 0.5;
    const double s = std::sqrt(3.0) / 2.0;
    return {c * k[0] - s * k[1], s * k[0] + c * k[1]};
}

// Independent TE solver: circular cutoff on the reciprocal lattice built from
// the primitive vectors (1,0), (1/2, sqrt(3)/2), and the inverse rule.
std::vector<double> oracle_te(double r_over_a, double eps_bg, int target_waves, Vec2 k, int bands)
{
    const double a1x = 1.0, a1y = 0.0, a2x = 0.5, a2y = std::sqrt(3.0) / 2.0;
    const double det = a1x * a2y - a1y * a2x;
    const double b1x = 2 * kPi * a2y / det, b1y = -2 * kPi * a2x / det;
    const double b2x = -2 * kPi * a1y / det, b2y = 2 * kPi * a1x / det;
    std::vector<std::pair<double, Vec2>> all;
    for (int i = -20; i <= 20; ++i)
    {
        for (int j = -20; j <= 20; ++j)
        {
            const Vec2 g{i * b1x + j * b2x, i * b1y + j * b2y};
            all.push_back({std::hypot(g[0], g[1]), g});
        }
    }
    std::sort(all.begin(), all.end(), [](auto &a, auto &b) { return a.first < b.first; });
    // extend to close the last shell
    std::size_t n = static_cast<std::size_t>(target_waves);
    while (n < all.size() && std::abs(all[n].first - all[n - 1].first) < 1e-9)
    {
        ++n;
    }
    const double cell = std::sqrt(3.0) / 2.0;
    const double f = kPi * r_over_a * r_over_a / cell;
    Eigen::MatrixXd E(n, n);
    for (std::size_t p = 0; p < n; ++p)
    {
        for (std::size_t q = 0; q < n; ++q)
        {
            const double gx = all[p].second[0] - all[q].second[0];
            const double gy = all[p].second[1] - all[q].second[1];
            const double g = std::hypot(gx, gy);
            if (g < 1e-12)
            {
                E(p, q) = f * 1.0 + (1 - f) * eps_bg;
            }
            else
            {
                const double x = g * r_over_a;
                E(p, q) = (1.0 - eps_bg) * f * 2.0 * std::cyl_bessel_j(1.0, x) / x;
            }
        }
    }
    const Eigen::MatrixXd eta = E.inverse();
    Eigen::MatrixXd M(n, n);
    for (std::size_t p = 0; p < n; ++p)
    {
        for (std::size_t q = 0; q < n; ++q)
        {
            const double dot = (k[0] + all[p].second[0]) * (k[0] + all[q].second[0]) +
                               (k[1] + all[p].second[1]) * (k[1] + all[q].second[1]);
            M(p, q) = 0.5 * (eta(p, q) + eta(q, p)) * dot;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    std::vector<double> out;
    for (int b = 0; b < bands; ++b)
    {
        out.push_back(std::sqrt(std::max(0.0, es.eigenvalues()[b])) / (2 * kPi));
    }
    return out;
}

} // namespace

TEST_CASE("fill fraction and Fourier coefficients")
{
    Lattice2D l;
    l.a_nm = 1.0;
    l.r_nm = 0.285;
    l.eps_bg = 4.7;
    CHECK(std::abs(l.fill_fraction() - 0.2947) < 5e-5);
    CHECK(l.fill_fraction() == doctest::Approx(2 * kPi * 0.285 * 0.285 / std::sqrt(3.0)));

    const std::array<Vec2, 6> shortest = {reciprocal_vector(1, 0),  reciprocal_vector(0, 1),
                                          reciprocal_vector(1, 1),  reciprocal_vector(-1, 0),
                                          reciprocal_vector(0, -1), reciprocal_vector(-1, -1)};
    const double ref = fourier_eps(l, shortest[0]);
    CHECK(ref != 0.0);
    for (const auto &g : shortest)
    {
        CHECK(std::hypot(g[0], g[1]) == doctest::Approx(4 * kPi / std::sqrt(3.0)));
        CHECK(std::abs(fourier_eps(l, g) - ref) <= 1e-12 * std::abs(ref));
    }
    CHECK(fourier_eps(l, {0.0, 0.0}) == doctest::Approx(4.7 + l.fill_fraction() * (1.0 - 4.7)));

    Lattice2D empty = l;
    empty.r_nm = 0.0;
    CHECK(fourier_eps(empty, {0.0, 0.0}) == 4.7);
    CHECK(fourier_eps(empty, shortest[2]) == 0.0);
}

TEST_CASE("hexagonal plane-wave bases")
{
    CHECK(hexagonal_basis(7).size() == 7);
    CHECK(hexagonal_basis(271).size() == 271);
    CHECK(hexagonal_basis(469).size() == 469);
    CHECK_THROWS_AS(hexagonal_basis(3), NumericsError);
    // closed under 60 degree rotation
    const auto basis = hexagonal_basis(127);
    for (const auto &g : basis)
    {
        const auto r = rotate60(g);
        const bool found = std::any_of(basis.begin(), basis.end(), [&](const Vec2 &h) {
            return std::hypot(h[0] - r[0], h[1] - r[1]) < 1e-9;
        });
        CHECK(found);
    }
}

TEST_CASE("empty lattice gives folded light lines")
{
    Lattice2D l;
    l.a_nm = 1.0;
    l.r_nm = 0.3;
    l.eps_bg = 4.7;
    l.eps_hole = 4.7;
    const double n = std::sqrt(4.7);
    for (const Vec2 k : {point_gamma(), point_m(), point_k()})
    {
        std::vector<double> expected;
        for (int h = -12; h <= 12; ++h)
        {
            for (int j = -12; j <= 12; ++j)
            {
                const auto g = reciprocal_vector(h, j);
                expected.push_back(std::hypot(k[0] + g[0], k[1] + g[1]) / (2 * kPi * n));
            }
        }
        std::sort(expected.begin(), expected.end());
        BandOptions opt;
        opt.n_bands = 10;
        for (auto rule : {ExpansionRule::kInverse, ExpansionRule::kDirect})
        {
            opt.rule = rule;
            const auto f = te_frequencies(l, 91, k, opt);
            for (int b = 0; b < 10; ++b)
            {
                CHECK(std::abs(f[b] - expected[b]) < 1e-8);
            }
        }
    }
}

TEST_CASE("time reversal, C6 symmetry and non-negative eigenvalues")
{
    const auto l = diamond_lattice(0);
    const Vec2 k{0.73, 1.21};
    BandOptions opt;
    opt.n_bands = 8;
    const auto a = te_frequencies(l, 127, k, opt);
    const auto b = te_frequencies(l, 127, {-k[0], -k[1]}, opt);
    Vec2 r = k;
    for (int i = 0; i < 5; ++i)
    {
        r = rotate60(r);
        const auto c = te_frequencies(l, 127, r, opt);
        for (int n = 0; n < 8; ++n)
        {
            CHECK(std::abs(c[n] - a[n]) < 1e-9);
        }
    }
    for (int n = 0; n < 8; ++n)
    {
        CHECK(std::abs(a[n] - b[n]) < 1e-10);
        if (n > 0)
        {
            CHECK(a[n] >= a[n - 1]);
        }
    }
    const auto d = te_bands(l, 127, KPath::gamma_m_k_gamma(4));
    CHECK(d.min_eigenvalue > -1e-10);
}

TEST_CASE("slab effective index")
{
    const double n = slab_effective_index(2.4, 214.0, 637.0);
    CHECK(n > 1.0);
    CHECK(n < 2.4);
    // the even-mode dispersion relation holds at the returned index
    const double k0h = kPi * 214.0 / 637.0;
    const double u = k0h * std::sqrt(2.4 * 2.4 - n * n);
    const double w = k0h * std::sqrt(n * n - 1.0);
    CHECK(u * std::tan(u) == doctest::Approx(w).epsilon(1e-9));
    CHECK(n == doctest::Approx(2.17).epsilon(0.01));
    // limits: thick slab approaches the bulk index, thin slab approaches air
    CHECK(slab_effective_index(2.4, 1e5, 637.0) == doctest::Approx(2.4).epsilon(1e-4));
    CHECK(slab_effective_index(2.4, 1.0, 637.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("diamond slab lattice has a TE gap around the cavity frequency")
{
    const auto l = diamond_lattice(0);
    const auto path = KPath::gamma_m_k_gamma(8);
    const auto t0 = std::chrono::steady_clock::now();
    const auto d469 = te_bands(l, 469, path);
    const auto d271 = te_bands(l, 271, path);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(seconds < 60.0);
    auto first_gap = [](const BandDiagram &d) {
        for (const auto &g : d.gaps)
        {
            if (g.lower_band == 0)
            {
                return g;
            }
        }
        FAIL("no TE gap above band 1");
        return Gap{};
    };
    const auto g469 = first_gap(d469);
    const auto g271 = first_gap(d271);
    MESSAGE("gap 469: [" << g469.lo << ", " << g469.hi << "]  271: [" << g271.lo << ", " << g271.hi << "]");
    const double target = 214.0 / 637.0;
    CHECK(target == doctest::Approx(0.3359).epsilon(1e-4));
    CHECK(g469.lo < target);
    CHECK(target < g469.hi);
    CHECK(std::abs(g271.lo - g469.lo) / g469.lo < 0.005);
    CHECK(std::abs(g271.hi - g469.hi) / g469.hi < 0.005);

    // independent brute-force solve on a circular cutoff
    double top1 = 0.0;
    double bottom2 = 1.0;
    for (const auto &k : path.points())
    {
        const auto f = oracle_te(0.285, l.eps_bg, 469, k, 2);
        top1 = std::max(top1, f[0]);
        bottom2 = std::min(bottom2, f[1]);
    }
    CHECK(top1 < target);
    CHECK(target < bottom2);
    CHECK(std::abs(top1 - g469.lo) / g469.lo < 0.005);
    CHECK(std::abs(bottom2 - g469.hi) / g469.hi < 0.005);
}

TEST_CASE("direct rule agrees roughly with the inverse rule")
{
    const auto l = diamond_lattice(0);
    BandOptions direct;
    direct.rule = ExpansionRule::kDirect;
    const auto a = te_frequencies(l, 271, point_m(), {});
    const auto b = te_frequencies(l, 271, point_m(), direct);
    for (int n = 0; n < 4; ++n)
    {
        CHECK(std::abs(a[n] - b[n]) / a[n] < 0.03);
    }
}

TEST_CASE("gap map")
{
    auto l = diamond_lattice(0);
    const auto path = KPath::gamma_m_k_gamma(6);
    SUBCASE("no holes, no gap")
    {
        const std::vector<double> r{0.0};
        const auto rows = gap_map(l, r, 127, path);
        CHECK(!rows[0].gap.has_value());
    }
    SUBCASE("row matches te_bands")
    {
        const std::vector<double> r{0.28, 0.285, 0.29};
        const auto rows = gap_map(l, r, 127, path);
        Lattice2D same = l;
        same.r_nm = 0.285 * l.a_nm;
        const auto d = te_bands(same, 127, path);
        REQUIRE(rows[1].gap.has_value());
        CHECK(rows[1].gap->lo == d.gaps.front().lo);
        CHECK(rows[1].gap->hi == d.gaps.front().hi);
    }
    SUBCASE("gap width is continuous in r/a")
    {
        std::vector<double> r;
        for (int i = 0; i <= 44; ++i)
        {
            r.push_back(0.2 + 0.005 * i);
        }
        const auto rows = gap_map(l, r, 127, path);
        for (std::size_t i = 1; i < rows.size(); ++i)
        {
            const auto width = [](const GapRow &row) { return row.gap ? row.gap->hi - row.gap->lo : 0.0; };
            const auto mid = [](const GapRow &row) { return row.gap ? 0.5 * (row.gap->hi + row.gap->lo) : 0.0; };
            const double m = std::max(mid(rows[i]), mid(rows[i - 1]));
            if (m > 0.0)
            {
                CHECK(std::abs(width(rows[i]) - width(rows[i - 1])) < 0.05 * m);
            }
        }
    }
    SUBCASE("non-monotone samples")
    {
        const std::vector<double> r{0.3, 0.2};
        CHECK_THROWS_AS(gap_map(l, r, 127, path), GeometryError);
    }
}
