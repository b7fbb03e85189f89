#include "phc/errors.hpp"
#include "phc/fdtd.hpp"

#include <cmath>
#include <sstream>

namespace phc
{
namespace
{
// Index of the mirror image of sample g (component with the given Yee offset
// along the mirror axis) in a full extent of n cells centred on node n/2.
// Returns -1 for node samples whose image is the far wall.
int mirror_index(int g, int n, bool node)
{
    if (node)
    {
        const int m = n - g;
        return m < n ? m : -1;
    }
    return n - 1 - g;
}

void check_grid_symmetry(const PermittivityGrid &grid, int axis)
{
    const GridDims &dims = grid.dims;
    const int n = dims.extent(axis);
    if (n % 2 != 0)
    {
        throw SymmetryError("grid extent along the mirror axis must be even");
    }
    double worst = 0.0;
    std::array<int, 4> where{-1, -1, -1, -1};
    for (int c = 0; c < 3; ++c)
    {
        const bool node = on_node_plane(static_cast<Component>(c), axis);
        for (int i = 0; i < dims.nx; ++i)
        {
            for (int j = 0; j < dims.ny; ++j)
            {
                for (int k = 0; k < dims.nz; ++k)
                {
                    std::array<int, 3> idx{i, j, k};
                    const int m = mirror_index(idx[axis], n, node);
                    if (m < 0)
                    {
                        continue;
                    }
                    std::array<int, 3> img = idx;
                    img[axis] = m;
                    const double d = std::abs(grid.at(c, i, j, k) - grid.at(c, img[0], img[1], img[2]));
                    if (d > worst)
                    {
                        worst = d;
                        where = {c, i, j, k};
                    }
                }
            }
        }
    }
    if (worst > 0.0)
    {
        std::ostringstream os;
        os << "permittivity grid is not symmetric about the " << "xyz"[axis] << " mirror plane: max |delta eps| = "
           << worst << " at E" << "xyz"[where[0]] << " cell (" << where[1] << ", " << where[2] << ", " << where[3]
           << ")";
        throw SymmetryError(os.str());
    }
}

PermittivityGrid crop(const PermittivityGrid &grid, int axis)
{
    PermittivityGrid out;
    out.dx_nm = grid.dx_nm;
    out.n_slab = grid.n_slab;
    out.dims = grid.dims;
    const int half = grid.dims.extent(axis) / 2;
    if (axis == 0)
    {
        out.dims.nx = half;
    }
    else if (axis == 1)
    {
        out.dims.ny = half;
    }
    else
    {
        out.dims.nz = half;
    }
    out.origin_nm = grid.origin_nm;
    out.origin_nm[axis] += half * grid.dx_nm;
    for (int c = 0; c < 3; ++c)
    {
        out.eps[c].resize(out.dims.size());
        for (int i = 0; i < out.dims.nx; ++i)
        {
            for (int j = 0; j < out.dims.ny; ++j)
            {
                for (int k = 0; k < out.dims.nz; ++k)
                {
                    std::array<int, 3> src{i, j, k};
                    src[axis] += half;
                    out.eps[c][out.dims.index(i, j, k)] = grid.at(c, src[0], src[1], src[2]);
                }
            }
        }
    }
    return out;
}

} // namespace

SimulationConfig apply_symmetry(const SimulationConfig &config)
{
    config.validate();
    if (!config.symmetry.any())
    {
        return config;
    }
    SimulationConfig out = config;
    std::shared_ptr<const PermittivityGrid> grid = config.grid;
    for (int axis = 0; axis < 3; ++axis)
    {
        if (!config.symmetry.active(axis) || config.reduced[axis])
        {
            continue;
        }
        check_grid_symmetry(*grid, axis);
        // the mirror plane is the grid centre node
        const double plane = grid->origin_nm[axis] + (grid->dims.extent(axis) / 2) * grid->dx_nm;
        for (const auto &src : config.sources)
        {
            const int parity = component_parity(src.component, axis, config.symmetry.planes[axis]);
            const bool node = on_node_plane(src.component, axis);
            const bool on_plane = node && std::abs(src.position_nm[axis] - plane) < 0.5 * grid->dx_nm;
            if (on_plane && parity < 0)
            {
                std::ostringstream os;
                os << "source " << component_name(src.component) << " lies on the " << "xyz"[axis]
                   << " mirror plane but the requested parity makes it vanish there";
                throw SymmetryError(os.str());
            }
        }
        out.domain_offset[axis] = grid->dims.extent(axis) / 2;
        out.reduced[axis] = true;
        grid = std::make_shared<const PermittivityGrid>(crop(*grid, axis));
    }
    out.grid = grid;
    return out;
}

VectorField unfold(const VectorField &reduced, const SimulationConfig &config)
{
    VectorField current = reduced;
    for (int axis = 0; axis < 3; ++axis)
    {
        if (!config.reduced[axis])
        {
            continue;
        }
        const int half = current.dims.extent(axis);
        GridDims full = current.dims;
        if (axis == 0)
        {
            full.nx = 2 * half;
        }
        else if (axis == 1)
        {
            full.ny = 2 * half;
        }
        else
        {
            full.nz = 2 * half;
        }
        VectorField next = VectorField::zeros(full, current.dx_nm);
        for (int c = 0; c < 3; ++c)
        {
            const Component comp = static_cast<Component>(c);
            const bool node = on_node_plane(comp, axis);
            const double sign = component_parity(comp, axis, config.symmetry.planes[axis]);
            for (int i = 0; i < full.nx; ++i)
            {
                for (int j = 0; j < full.ny; ++j)
                {
                    for (int k = 0; k < full.nz; ++k)
                    {
                        std::array<int, 3> g{i, j, k};
                        std::array<int, 3> src = g;
                        double s = 1.0;
                        if (g[axis] >= half)
                        {
                            src[axis] = g[axis] - half;
                        }
                        else
                        {
                            const int m = mirror_index(g[axis], 2 * half, node);
                            if (m < 0)
                            {
                                continue;
                            }
                            src[axis] = m - half;
                            s = sign;
                        }
                        next.e[c][full.index(i, j, k)] = s * current.e[c][current.dims.index(src[0], src[1], src[2])];
                    }
                }
            }
        }
        current = std::move(next);
    }
    return current;
}

} // namespace phc
