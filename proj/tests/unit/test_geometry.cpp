#include "phc/errors.hpp"
#include "phc/geometry.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace phc;

namespace
{
const double kRowPitch = std::sqrt(3.0) / 2.0;

std::vector<Hole> row_holes(const std::vector<Hole> &holes, double y, double tol = 1e-9)
{
    std::vector<Hole> out;
    for (const auto &h : holes)
    {
        if (std::abs(h.y_nm - y) < tol)
        {
            out.push_back(h);
        }
    }
    return out;
}

bool contains(const std::vector<Hole> &holes, double x, double y, double tol = 1e-9)
{
    return std::any_of(holes.begin(), holes.end(),
                       [&](const Hole &h) { return std::abs(h.x_nm - x) < tol && std::abs(h.y_nm - y) < tol; });
}

void check_mirror_invariance(const std::vector<Hole> &holes)
{
    for (const auto &h : holes)
    {
        CHECK(contains(holes, -h.x_nm, h.y_nm));
        CHECK(contains(holes, h.x_nm, -h.y_nm));
    }
}

DeviceSpec plain_lattice()
{
    DeviceSpec spec = paper_l3_device();
    spec.defect = std::monostate{};
    return spec;
}

} // namespace

TEST_CASE("L3 layout removes three holes and shifts the axial neighbours")
{
    const DeviceSpec spec = paper_l3_device();
    const auto holes = hole_centers(spec);
    const double a = spec.lattice.a_nm;
    CHECK_FALSE(contains(holes, 0.0, 0.0));
    CHECK_FALSE(contains(holes, a, 0.0));
    CHECK_FALSE(contains(holes, -a, 0.0));

    auto axis = row_holes(holes, 0.0);
    std::vector<double> positive;
    for (const auto &h : axis)
    {
        if (h.x_nm > 0.0)
        {
            positive.push_back(h.x_nm);
        }
    }
    std::sort(positive.begin(), positive.end());
    REQUIRE(positive.size() >= 3);
    // nearest surviving site is 2a, pushed out by D1 a
    CHECK(positive[0] == doctest::Approx(474.866).epsilon(1e-12));
    CHECK(positive[1] == doctest::Approx((3.0 + 0.025) * a).epsilon(1e-12));
    CHECK(positive[2] == doctest::Approx((4.0 + 0.2) * a).epsilon(1e-12));
    // transverse rows are not displaced
    for (const auto &h : row_holes(holes, kRowPitch * a))
    {
        const double u = h.x_nm / a - 0.5;
        CHECK(std::abs(u - std::round(u)) < 1e-12);
    }
    check_mirror_invariance(holes);
}

TEST_CASE("hole list is sorted lexicographically")
{
    const auto holes = hole_centers(paper_heterostructure_device());
    CHECK(std::is_sorted(holes.begin(), holes.end(), [](const Hole &l, const Hole &r) {
        return l.x_nm != r.x_nm ? l.x_nm < r.x_nm : l.y_nm < r.y_nm;
    }));
}

TEST_CASE("undefected lattice has unit nearest-neighbour spacing")
{
    const DeviceSpec spec = plain_lattice();
    const auto holes = hole_centers(spec);
    const double a = spec.lattice.a_nm;
    CHECK(contains(holes, 0.0, 0.0));
    for (std::size_t p = 0; p < holes.size(); ++p)
    {
        double nearest = 1e300;
        for (std::size_t q = 0; q < holes.size(); ++q)
        {
            if (p != q)
            {
                nearest = std::min(nearest, std::hypot(holes[p].x_nm - holes[q].x_nm, holes[p].y_nm - holes[q].y_nm));
            }
        }
        CHECK(nearest == doctest::Approx(a).epsilon(1e-12));
    }
}

TEST_CASE("heterostructure spacings follow the graded axis")
{
    const DeviceSpec spec = paper_heterostructure_device();
    const auto holes = hole_centers(spec);
    const auto &hs = std::get<HeterostructureParams>(spec.defect);
    const double a = spec.lattice.a_nm;
    // innermost rows bound the line defect at +-W a / 2
    const double y1 = hs.width * a / 2.0;
    auto row = row_holes(holes, y1);
    REQUIRE(!row.empty());
    CHECK(row_holes(holes, 0.0).empty());
    std::vector<double> gaps;
    for (std::size_t n = 1; n < row.size(); ++n)
    {
        gaps.push_back(row[n].x_nm - row[n - 1].x_nm);
    }
    int n_a1 = 0;
    int n_a2 = 0;
    for (double g : gaps)
    {
        if (std::abs(g - 215.25) < 1e-9)
        {
            ++n_a1;
        }
        else if (std::abs(g - 220.5) < 1e-9)
        {
            ++n_a2;
        }
        else
        {
            CHECK(g == doctest::Approx(a).epsilon(1e-12));
        }
    }
    CHECK(n_a1 == 4);
    CHECK(n_a2 == 1);
    // second rows keep the regular row pitch from the first
    CHECK_FALSE(row_holes(holes, y1 + kRowPitch * a, 1e-6).empty());
    check_mirror_invariance(holes);
}

TEST_CASE("overlapping holes raise a geometry error naming the pair")
{
    DeviceSpec spec = paper_l3_device();
    spec.defect = L3Params{0.49, 0.49, 0.0};
    // D1 = D2 = 0.49 pushes the 2a hole onto the 3a hole
    try
    {
        hole_centers(spec);
        FAIL("expected GeometryError");
    }
    catch (const GeometryError &e)
    {
        CHECK(std::string(e.what()).find("overlapping holes") != std::string::npos);
    }
}

TEST_CASE("invalid parameters are rejected")
{
    DeviceSpec spec = paper_l3_device();
    spec.lattice.r_nm = 0.6 * spec.lattice.a_nm;
    CHECK_THROWS_AS(hole_centers(spec), GeometryError);
    spec = paper_l3_device();
    spec.defect = L3Params{0.5, 0.0, 0.0};
    CHECK_THROWS_AS(spec.validate(), GeometryError);
    spec = paper_heterostructure_device();
    auto &hs = std::get<HeterostructureParams>(spec.defect);
    hs.a1_ratio = 1.1;
    CHECK_THROWS_AS(spec.validate(), GeometryError);
    spec = paper_heterostructure_device();
    std::get<HeterostructureParams>(spec.defect).width = 0.5;
    CHECK_THROWS_AS(spec.validate(), GeometryError);
    spec = paper_l3_device();
    spec.lattice.nx = 7;
    CHECK_THROWS_AS(spec.validate(), GeometryError);
}

TEST_CASE("empty device rasterizes to vacuum")
{
    DeviceSpec spec = paper_l3_device();
    spec.defect = std::monostate{};
    spec.lattice.r_nm = 0.0;
    spec.lattice.thickness_nm = 0.0;
    spec.lattice.nx = 3;
    spec.lattice.ny = 3;
    spec.lattice.padding_nm = 100.0;
    const auto grid = rasterize(spec, {8.0, 2});
    for (const auto &e : grid.eps)
    {
        CHECK(std::all_of(e.begin(), e.end(), [](double v) { return v == 1.0; }));
    }
}

TEST_CASE("rasterized permittivity stays within bounds and is bulk away from holes")
{
    DeviceSpec spec = paper_l3_device();
    spec.lattice.nx = 9;
    spec.lattice.ny = 5;
    spec.lattice.padding_nm = 200.0;
    const auto grid = rasterize(spec, {8.0, 4});
    const double bulk = 2.4 * 2.4;
    for (const auto &e : grid.eps)
    {
        for (double v : e)
        {
            CHECK(v >= 1.0);
            CHECK(v <= bulk);
        }
    }
    // cell centre of the L3 defect, in the slab midplane
    const int ci = grid.dims.nx / 2;
    const int cj = grid.dims.ny / 2;
    const int ck = grid.dims.nz / 2;
    CHECK(grid.at(1, ci, cj, ck) == doctest::Approx(5.76).epsilon(1e-15));
    CHECK(bulk == doctest::Approx(5.76));
}

TEST_CASE("symmetric devices rasterize to bit-for-bit symmetric grids")
{
    for (const DeviceSpec &base : {paper_l3_device(), paper_heterostructure_device()})
    {
        DeviceSpec spec = base;
        spec.lattice.padding_nm = 150.0;
        if (std::holds_alternative<L3Params>(spec.defect))
        {
            spec.lattice.nx = 9;
            spec.lattice.ny = 5;
        }
        else
        {
            spec.lattice.nx = 10;
            spec.lattice.ny = 5;
        }
        const auto g = rasterize(spec, {10.0, 2});
        const auto &d = g.dims;
        for (int c = 0; c < 3; ++c)
        {
            const auto off = yee_offset(static_cast<Component>(c));
            auto mirror = [&](int idx, int n, double o) { return o == 0.0 ? n - idx : n - 1 - idx; };
            int mismatches = 0;
            for (int i = 1; i < d.nx; ++i)
            {
                for (int j = 1; j < d.ny; ++j)
                {
                    for (int k = 1; k < d.nz; ++k)
                    {
                        const double v = g.at(c, i, j, k);
                        const int mi = mirror(i, d.nx, off[0]);
                        const int mj = mirror(j, d.ny, off[1]);
                        const int mk = mirror(k, d.nz, off[2]);
                        mismatches += v != g.at(c, mi, j, k);
                        mismatches += v != g.at(c, i, mj, k);
                        mismatches += v != g.at(c, i, j, mk);
                    }
                }
            }
            CHECK(mismatches == 0);
        }
    }
}

TEST_CASE("unit-cell air fill fraction converges to the analytic value")
{
    SlabLattice lat;
    const double exact = analytic_air_fill_fraction(0.285);
    CHECK(exact == doctest::Approx(0.2947).epsilon(5e-4));
    const double f32 = air_fill_fraction(lat, 32.0);
    CHECK(std::abs(f32 - exact) / exact < 0.005);
}

TEST_CASE("coarse cell fractions match volume-averaged fine cells")
{
    // rasterize at 2k, average 8 children, compare with direct k
    const DeviceSpec spec = paper_l3_device();
    MaterialIndex index(hole_centers(spec), spec.lattice.thickness_nm, spec.lattice.a_nm);
    const double contrast = 5.76 - 1.0;
    for (double k : {8.0, 16.0})
    {
        const double h = spec.lattice.a_nm / k;
        double worst = 0.0;
        for (int i = 0; i < 48; ++i)
        {
            for (int j = 0; j < 24; ++j)
            {
                const double x = (i - 24 + 0.5) * h * 0.37;
                const double y = (j - 12 + 0.5) * h * 0.41;
                const double z = spec.lattice.thickness_nm / 2.0 + (j % 3 - 1) * 0.3 * h;
                const double coarse = index.solid_fraction(x, y, z, h);
                double fine = 0.0;
                for (int q = 0; q < 8; ++q)
                {
                    const double ox = ((q & 1) ? 0.25 : -0.25) * h;
                    const double oy = ((q & 2) ? 0.25 : -0.25) * h;
                    const double oz = ((q & 4) ? 0.25 : -0.25) * h;
                    fine += index.solid_fraction(x + ox, y + oy, z + oz, h / 2.0) / 8.0;
                }
                worst = std::max(worst, contrast * std::abs(coarse - fine));
            }
        }
        CHECK(worst <= 0.5 * contrast / k);
    }
}

TEST_CASE("dielectric volume converges to slab minus holes")
{
    DeviceSpec spec = paper_l3_device();
    spec.lattice.nx = 9;
    spec.lattice.ny = 5;
    spec.lattice.padding_nm = 100.0;
    const auto holes = hole_centers(spec);
    const double H = spec.lattice.thickness_nm;
    const double contrast = 5.76 - 1.0;
    double previous = 1e300;
    for (double res : {8.0, 16.0, 32.0})
    {
        const auto g = rasterize(spec, {res, 0});
        double vol = 0.0;
        for (double v : g.eps[2])
        {
            vol += (v - 1.0) / contrast;
        }
        vol *= g.dx_nm * g.dx_nm * g.dx_nm;
        // the slab spans the whole grid cross-section; every hole lies inside it
        double exact = g.dims.nx * g.dx_nm * g.dims.ny * g.dx_nm * H;
        for (const auto &h : holes)
        {
            exact -= std::numbers::pi * h.r_nm * h.r_nm * H;
        }
        const double err = std::abs(vol - exact) / exact;
        CHECK(err < 1.0 / res);
        CHECK(err <= previous);
        previous = err;
    }
}

TEST_CASE("dielectric energy fraction")
{
    const GridDims dims{2, 1, 1};
    PermittivityGrid g = PermittivityGrid::uniform(dims, 1.0);
    VectorField f = VectorField::zeros(dims, 1.0);
    SUBCASE("half dielectric, uniform field")
    {
        g.eps[0][0] = 5.76;
        f.e[0][0] = 1.0;
        f.e[0][1] = 1.0;
        CHECK(dielectric_energy_fraction(g, f) == doctest::Approx(5.76 / 6.76).epsilon(1e-14));
        CHECK(5.76 / 6.76 == doctest::Approx(0.852).epsilon(1e-3));
    }
    SUBCASE("field only in air")
    {
        g.eps[0][0] = 5.76;
        f.e[0][1] = {0.3, 0.4};
        CHECK(dielectric_energy_fraction(g, f) == 0.0);
    }
    SUBCASE("zero field is undefined")
    {
        CHECK_THROWS_AS(dielectric_energy_fraction(g, f), NumericsError);
    }
}

TEST_CASE("grid memory budget")
{
    RasterOptions opts{16.0, 10, 1024};
    try
    {
        rasterize(paper_l3_device(), opts);
        FAIL("expected SizingError");
    }
    catch (const SizingError &e)
    {
        CHECK(e.required_bytes() > 1024);
    }
}
