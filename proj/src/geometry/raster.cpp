#include "phc/errors.hpp"
#include "phc/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace phc
{
namespace
{
double sub_offset(int q, int samples) { return (static_cast<double>(q) + 0.5) / static_cast<double>(samples) - 0.5; }

int half_cells(double half_extent_nm, double dx)
{
    return std::max(1, static_cast<int>(std::ceil(half_extent_nm / dx - 1e-9)));
}

} // namespace

MaterialIndex::MaterialIndex(std::vector<Hole> holes, double thickness_nm, double bucket_nm)
    : holes_(std::move(holes)), thickness_nm_(thickness_nm), bucket_nm_(bucket_nm)
{
    if (holes_.empty())
    {
        return;
    }
    double x_min = holes_.front().x_nm;
    double x_max = x_min;
    double y_min = holes_.front().y_nm;
    double y_max = y_min;
    for (const auto &h : holes_)
    {
        x_min = std::min(x_min, h.x_nm);
        x_max = std::max(x_max, h.x_nm);
        y_min = std::min(y_min, h.y_nm);
        y_max = std::max(y_max, h.y_nm);
    }
    x0_ = x_min - bucket_nm_;
    y0_ = y_min - bucket_nm_;
    bx_ = static_cast<int>((x_max - x0_) / bucket_nm_) + 2;
    by_ = static_cast<int>((y_max - y0_) / bucket_nm_) + 2;
    buckets_.assign(static_cast<std::size_t>(bx_) * static_cast<std::size_t>(by_), {});
    for (std::size_t n = 0; n < holes_.size(); ++n)
    {
        const int ix = static_cast<int>((holes_[n].x_nm - x0_) / bucket_nm_);
        const int iy = static_cast<int>((holes_[n].y_nm - y0_) / bucket_nm_);
        buckets_[static_cast<std::size_t>(ix) * by_ + iy].push_back(static_cast<int>(n));
    }
}

bool MaterialIndex::in_hole(double x, double y) const
{
    if (holes_.empty())
    {
        return false;
    }
    const int ix = static_cast<int>(std::floor((x - x0_) / bucket_nm_));
    const int iy = static_cast<int>(std::floor((y - y0_) / bucket_nm_));
    for (int bx = ix - 1; bx <= ix + 1; ++bx)
    {
        if (bx < 0 || bx >= bx_)
        {
            continue;
        }
        for (int by = iy - 1; by <= iy + 1; ++by)
        {
            if (by < 0 || by >= by_)
            {
                continue;
            }
            for (int n : buckets_[static_cast<std::size_t>(bx) * by_ + by])
            {
                const auto &h = holes_[n];
                const double dx = x - h.x_nm;
                const double dy = y - h.y_nm;
                if (dx * dx + dy * dy < h.r_nm * h.r_nm)
                {
                    return true;
                }
            }
        }
    }
    return false;
}

double MaterialIndex::in_plane_solid_fraction(double x, double y, double edge, int samples) const
{
    int solid = 0;
    for (int p = 0; p < samples; ++p)
    {
        const double px = x + sub_offset(p, samples) * edge;
        for (int q = 0; q < samples; ++q)
        {
            const double py = y + sub_offset(q, samples) * edge;
            solid += in_hole(px, py) ? 0 : 1;
        }
    }
    return static_cast<double>(solid) / static_cast<double>(samples * samples);
}

double MaterialIndex::z_solid_fraction(double z, double edge, int samples) const
{
    int solid = 0;
    for (int q = 0; q < samples; ++q)
    {
        solid += in_slab_z(z + sub_offset(q, samples) * edge) ? 1 : 0;
    }
    return static_cast<double>(solid) / static_cast<double>(samples);
}

double MaterialIndex::solid_fraction(double x, double y, double z, double edge, int samples) const
{
    // slab(z) x not-hole(x, y) is separable, so the cube average factorises
    return in_plane_solid_fraction(x, y, edge, samples) * z_solid_fraction(z, edge, samples);
}

PermittivityGrid PermittivityGrid::uniform(GridDims dims, double dx_nm, double value)
{
    PermittivityGrid g;
    g.dims = dims;
    g.dx_nm = dx_nm;
    g.origin_nm = {-dims.nx / 2 * dx_nm, -dims.ny / 2 * dx_nm, -dims.nz / 2 * dx_nm};
    g.n_slab = std::sqrt(value);
    for (auto &e : g.eps)
    {
        e.assign(dims.size(), value);
    }
    return g;
}

std::array<double, 3> PermittivityGrid::sample_position(int axis, int i, int j, int k) const
{
    const std::array<int, 3> idx{i, j, k};
    std::array<double, 3> p{};
    for (int d = 0; d < 3; ++d)
    {
        const double half = d == axis ? 0.5 : 0.0;
        p[d] = origin_nm[d] + (static_cast<double>(idx[d]) + half) * dx_nm;
    }
    return p;
}

GridDims raster_dims(const DeviceSpec &spec, const RasterOptions &options)
{
    const double dx = spec.lattice.a_nm / options.resolution;
    const auto half = device_half_extent(spec);
    GridDims dims;
    dims.nx = 2 * (half_cells(half[0], dx) + options.boundary_cells);
    dims.ny = 2 * (half_cells(half[1], dx) + options.boundary_cells);
    dims.nz = 2 * (half_cells(half[2], dx) + options.boundary_cells);
    return dims;
}

PermittivityGrid rasterize(const DeviceSpec &spec, const RasterOptions &options)
{
    if (!(options.resolution >= 8.0))
    {
        throw GeometryError("resolution must be at least 8 cells per lattice constant");
    }
    if (options.boundary_cells < 0)
    {
        throw GeometryError("boundary cell count must be non-negative");
    }
    const auto holes = hole_centers(spec);
    const GridDims dims = raster_dims(spec, options);
    const std::size_t required = 3 * dims.size() * sizeof(double);
    if (required > options.memory_budget_bytes)
    {
        throw SizingError("permittivity grid " + std::to_string(dims.nx) + "x" + std::to_string(dims.ny) + "x" +
                              std::to_string(dims.nz) + " needs " + std::to_string(required) +
                              " bytes, over the budget of " + std::to_string(options.memory_budget_bytes),
                          required);
    }

    const auto &lat = spec.lattice;
    const double dx = lat.a_nm / options.resolution;
    const double contrast = lat.n_slab * lat.n_slab - 1.0;
    MaterialIndex index(holes, lat.thickness_nm, lat.a_nm);

    PermittivityGrid grid;
    grid.dims = dims;
    grid.dx_nm = dx;
    grid.n_slab = lat.n_slab;
    const int cx = dims.nx / 2;
    const int cy = dims.ny / 2;
    const int cz = dims.nz / 2;
    grid.origin_nm = {-cx * dx, -cy * dx, -cz * dx};

    // Positions are formed as (integer + offset) * dx so that mirror partners
    // are exact negatives of each other.
    auto coord = [dx](int idx, int centre, double half) { return (static_cast<double>(idx - centre) + half) * dx; };

    for (int comp = 0; comp < 3; ++comp)
    {
        const auto off = yee_offset(static_cast<Component>(comp));
        std::vector<double> fz(static_cast<std::size_t>(dims.nz));
        for (int k = 0; k < dims.nz; ++k)
        {
            fz[k] = index.z_solid_fraction(coord(k, cz, off[2]), dx);
        }
        auto &eps = grid.eps[comp];
        eps.assign(dims.size(), 1.0);
        for (int i = 0; i < dims.nx; ++i)
        {
            const double x = coord(i, cx, off[0]);
            for (int j = 0; j < dims.ny; ++j)
            {
                const double y = coord(j, cy, off[1]);
                const double fxy = index.in_plane_solid_fraction(x, y, dx);
                double *row = eps.data() + dims.index(i, j, 0);
                for (int k = 0; k < dims.nz; ++k)
                {
                    row[k] = 1.0 + contrast * (fxy * fz[k]);
                }
            }
        }
    }
    return grid;
}

double air_fill_fraction(const SlabLattice &lattice, double resolution)
{
    const double a = lattice.a_nm;
    const double pitch = std::sqrt(3.0) * a;
    // Holes of the periodic lattice covering the rectangle [0,a) x [0, sqrt(3) a) and its border.
    std::vector<Hole> holes;
    for (int j = -1; j <= 2; ++j)
    {
        const double off = (std::abs(j) % 2 == 1) ? 0.5 : 0.0;
        for (int u = -1; u <= 2; ++u)
        {
            holes.push_back({(u + off) * a, j * pitch / 2.0, lattice.r_nm});
        }
    }
    MaterialIndex index(holes, 0.0, a);
    const int nx = static_cast<int>(std::lround(resolution));
    const int ny = static_cast<int>(std::lround(resolution * std::sqrt(3.0)));
    const double hx = a / nx;
    const double hy = pitch / ny;
    const int samples = 4;
    long air = 0;
    for (int i = 0; i < nx; ++i)
    {
        for (int j = 0; j < ny; ++j)
        {
            for (int p = 0; p < samples; ++p)
            {
                for (int q = 0; q < samples; ++q)
                {
                    const double x = (i + 0.5 + sub_offset(p, samples)) * hx;
                    const double y = (j + 0.5 + sub_offset(q, samples)) * hy;
                    air += index.in_hole(x, y) ? 1 : 0;
                }
            }
        }
    }
    return static_cast<double>(air) / static_cast<double>(nx * ny * samples * samples);
}

double dielectric_energy_fraction(const PermittivityGrid &eps, const VectorField &field)
{
    if (!(field.dims == eps.dims))
    {
        throw std::invalid_argument("field and permittivity grid dimensions differ");
    }
    double total = 0.0;
    double dielectric = 0.0;
    for (int c = 0; c < 3; ++c)
    {
        const auto &e = eps.eps[c];
        const auto &f = field.e[c];
        for (std::size_t n = 0; n < e.size(); ++n)
        {
            const double w = e[n] * std::norm(f[n]);
            total += w;
            if (e[n] > 1.0)
            {
                dielectric += w;
            }
        }
    }
    if (!(total > 0.0))
    {
        throw NumericsError("dielectric energy fraction is undefined for an all-zero field");
    }
    return dielectric / total;
}

} // namespace phc
