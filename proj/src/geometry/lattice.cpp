#include "phc/errors.hpp"
#include "phc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace phc
{
namespace
{
const double kRowPitch = std::sqrt(3.0) / 2.0;

double signum(double v) { return v < 0.0 ? -1.0 : 1.0; }

// x offset of row j in units of a: odd rows are shifted by half a period.
double row_offset(int j) { return (std::abs(j) % 2 == 1) ? 0.5 : 0.0; }

std::string describe(const Hole &h)
{
    std::ostringstream os;
    os << std::setprecision(6) << "(" << h.x_nm << ", " << h.y_nm << ", r=" << h.r_nm << ")";
    return os.str();
}

void check_overlaps(const std::vector<Hole> &holes)
{
    double r_max = 0.0;
    for (const auto &h : holes)
    {
        r_max = std::max(r_max, h.r_nm);
    }
    // holes are sorted by x, so a sweep over the 2 r_max window is enough
    for (std::size_t p = 0; p < holes.size(); ++p)
    {
        for (std::size_t q = p + 1; q < holes.size(); ++q)
        {
            const double dx = holes[q].x_nm - holes[p].x_nm;
            if (dx >= 2.0 * r_max)
            {
                break;
            }
            const double dy = holes[q].y_nm - holes[p].y_nm;
            const double d = std::hypot(dx, dy);
            if (d < holes[p].r_nm + holes[q].r_nm)
            {
                throw GeometryError("overlapping holes " + describe(holes[p]) + " and " + describe(holes[q]));
            }
        }
    }
}

void sort_holes(std::vector<Hole> &holes)
{
    std::sort(holes.begin(), holes.end(), [](const Hole &l, const Hole &r) {
        return l.x_nm != r.x_nm ? l.x_nm < r.x_nm : l.y_nm < r.y_nm;
    });
}

int half_rows(int ny) { return (ny - 1) / 2; }

std::vector<Hole> l3_holes(const SlabLattice &lat, const L3Params *l3, double half_x)
{
    std::vector<Hole> holes;
    const double a = lat.a_nm;
    const int jmax = half_rows(lat.ny);
    const int umax = static_cast<int>(std::ceil(half_x / a)) + 1;
    for (int j = -jmax; j <= jmax; ++j)
    {
        const double off = row_offset(j);
        const double y = static_cast<double>(j) * kRowPitch * a;
        for (int u = -umax; u <= umax; ++u)
        {
            // |x| is built from |u| so mirrored sites are exact negatives
            const double s = (static_cast<double>(u) + off) < 0.0 ? -1.0 : 1.0;
            double mag = std::abs(static_cast<double>(u) + off);
            if (mag * a >= half_x - 1e-9 * a)
            {
                continue;
            }
            if (l3 != nullptr && j == 0)
            {
                const int n = std::abs(u);
                if (n <= 1)
                {
                    continue;
                }
                if (n == 2)
                {
                    mag += l3->d1;
                }
                else if (n == 3)
                {
                    mag += l3->d2;
                }
                else if (n == 4)
                {
                    mag += l3->d3;
                }
            }
            holes.push_back({s * (mag * a), y, lat.r_nm});
        }
    }
    return holes;
}

std::vector<Hole> heterostructure_holes(const SlabLattice &lat, const HeterostructureParams &hs, double half_x)
{
    std::vector<Hole> holes;
    const double a = lat.a_nm;
    const int jmax = half_rows(lat.ny);
    const double half_u = static_cast<double>(lat.nx) / 2.0;
    const int umax = static_cast<int>(std::ceil(half_u)) + 1;
    for (int j = -jmax; j <= jmax; ++j)
    {
        if (j == 0)
        {
            continue;
        }
        const double ymag = (hs.width / 2.0 + static_cast<double>(std::abs(j) - 1) * kRowPitch) * a;
        const double y = signum(static_cast<double>(j)) * ymag;
        const double off = row_offset(j);
        for (int u = -umax; u <= umax; ++u)
        {
            const double lattice_u = static_cast<double>(u) + off;
            const double mag = heterostructure_axis_position(hs, std::abs(lattice_u)) * a;
            if (mag >= half_x - 1e-9 * a)
            {
                continue;
            }
            holes.push_back({signum(lattice_u) * mag, y, lat.r_nm});
        }
    }
    return holes;
}

} // namespace

void SlabLattice::validate() const
{
    if (!(a_nm > 0.0))
    {
        throw GeometryError("lattice constant a must be positive");
    }
    // r = 0 and H = 0 describe empty devices (no holes / no slab)
    if (!(r_nm >= 0.0) || !(r_nm < a_nm / 2.0))
    {
        throw GeometryError("hole radius must satisfy 0 <= r < a/2");
    }
    if (!(thickness_nm >= 0.0))
    {
        throw GeometryError("slab thickness must be non-negative");
    }
    if (!(n_slab >= 1.0))
    {
        throw GeometryError("slab index must be >= 1");
    }
    if (nx < 1 || ny < 1)
    {
        throw GeometryError("lattice period counts nx, ny must be positive");
    }
    if (ny % 2 == 0)
    {
        throw GeometryError("ny must be odd so the row layout is mirror symmetric");
    }
    if (!(padding_nm >= 0.0))
    {
        throw GeometryError("padding must be non-negative");
    }
}

void DeviceSpec::validate() const
{
    lattice.validate();
    if (!(target_wavelength_nm > 0.0))
    {
        throw GeometryError("target wavelength must be positive");
    }
    const double r_over_a = lattice.r_nm / lattice.a_nm;
    if (const auto *l3 = std::get_if<L3Params>(&defect))
    {
        for (double d : {l3->d1, l3->d2, l3->d3})
        {
            if (!(d >= 0.0 && d < 0.5))
            {
                throw GeometryError("L3 displacements must lie in [0, 0.5)");
            }
        }
        if (lattice.nx < 9)
        {
            throw GeometryError("L3 cavity needs nx >= 9 to hold the displaced holes");
        }
    }
    else if (const auto *hs = std::get_if<HeterostructureParams>(&defect))
    {
        if (!(hs->a1_ratio >= 1.0 && hs->a1_ratio <= hs->a2_ratio))
        {
            throw GeometryError("heterostructure grading must satisfy 1 <= a1_ratio <= a2_ratio");
        }
        if (!(hs->width > 2.0 * r_over_a))
        {
            throw GeometryError("line-defect width W must exceed 2r/a");
        }
        if (hs->n_a1 < 0 || hs->n_a2 < 0)
        {
            throw GeometryError("heterostructure period counts must be non-negative");
        }
        if (static_cast<double>(hs->n_a2) / 2.0 + hs->n_a1 + 1.0 > static_cast<double>(lattice.nx) / 2.0)
        {
            throw GeometryError("graded heterostructure core does not fit inside nx periods");
        }
        if (lattice.ny < 3)
        {
            throw GeometryError("heterostructure needs ny >= 3");
        }
    }
}

DeviceSpec paper_l3_device()
{
    DeviceSpec spec;
    spec.lattice.a_nm = 214.0;
    spec.lattice.r_nm = 0.285 * 214.0;
    spec.lattice.thickness_nm = 214.0;
    spec.lattice.n_slab = 2.4;
    spec.lattice.nx = 15;
    spec.lattice.ny = 11;
    spec.lattice.padding_nm = 0.7 * 637.0;
    spec.defect = L3Params{0.219, 0.025, 0.2};
    spec.target_wavelength_nm = 637.0;
    return spec;
}

DeviceSpec paper_heterostructure_device()
{
    DeviceSpec spec;
    spec.lattice.a_nm = 210.0;
    spec.lattice.r_nm = 0.275 * 210.0;
    spec.lattice.thickness_nm = 0.96 * 210.0;
    spec.lattice.n_slab = 2.4;
    spec.lattice.nx = 24;
    spec.lattice.ny = 9;
    spec.lattice.padding_nm = 0.7 * 637.0;
    spec.defect = HeterostructureParams{1.69, 1.025, 1.05, 2, 1};
    spec.target_wavelength_nm = 637.0;
    return spec;
}

double heterostructure_axis_position(const HeterostructureParams &hs, double u)
{
    const double mag = std::abs(u);
    const double h2 = static_cast<double>(hs.n_a2) / 2.0;
    const double h1 = h2 + static_cast<double>(hs.n_a1);
    double x = 0.0;
    if (mag <= h2)
    {
        x = hs.a2_ratio * mag;
    }
    else if (mag <= h1)
    {
        x = hs.a2_ratio * h2 + hs.a1_ratio * (mag - h2);
    }
    else
    {
        x = hs.a2_ratio * h2 + hs.a1_ratio * static_cast<double>(hs.n_a1) + (mag - h1);
    }
    return signum(u) * x;
}

std::array<double, 3> device_half_extent(const DeviceSpec &spec)
{
    const auto &lat = spec.lattice;
    const double a = lat.a_nm;
    const double z = lat.thickness_nm / 2.0 + lat.padding_nm;
    const int jmax = half_rows(lat.ny);
    if (const auto *hs = std::get_if<HeterostructureParams>(&spec.defect))
    {
        const double x = heterostructure_axis_position(*hs, static_cast<double>(lat.nx) / 2.0) * a;
        const double outer = jmax >= 1 ? hs->width / 2.0 + static_cast<double>(jmax - 1) * kRowPitch : 0.0;
        const double y = (outer + kRowPitch / 2.0) * a;
        return {x, y, z};
    }
    const double x = static_cast<double>(lat.nx) / 2.0 * a;
    const double y = (static_cast<double>(jmax) + 0.5) * kRowPitch * a;
    return {x, y, z};
}

std::vector<Hole> hole_centers(const DeviceSpec &spec)
{
    spec.validate();
    const auto &lat = spec.lattice;
    if (lat.r_nm == 0.0)
    {
        return {};
    }
    const auto half = device_half_extent(spec);
    std::vector<Hole> holes;
    if (const auto *hs = std::get_if<HeterostructureParams>(&spec.defect))
    {
        holes = heterostructure_holes(lat, *hs, half[0]);
    }
    else
    {
        holes = l3_holes(lat, std::get_if<L3Params>(&spec.defect), half[0]);
    }
    for (const auto &h : holes)
    {
        if (std::abs(h.x_nm) + h.r_nm > half[0] + 1e-9 || std::abs(h.y_nm) + h.r_nm > half[1] + 1e-9)
        {
            throw GeometryError("hole " + describe(h) + " falls outside the device footprint");
        }
    }
    sort_holes(holes);
    check_overlaps(holes);
    return holes;
}

void write_holes_csv(const std::string &path, std::span<const Hole> holes)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "x_nm,y_nm,r_nm\n";
    out << std::setprecision(17);
    for (const auto &h : holes)
    {
        out << h.x_nm << ',' << h.y_nm << ',' << h.r_nm << '\n';
    }
    if (!out)
    {
        throw std::runtime_error("write failed for " + path);
    }
}

} // namespace phc
