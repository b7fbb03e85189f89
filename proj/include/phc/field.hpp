#pragma once

#include "phc/yee.hpp"

#include <array>
#include <complex>
#include <vector>

namespace phc
{
// Complex E field sampled on the Yee E points of a grid (same layout as
// PermittivityGrid::eps).
struct VectorField
{
    GridDims dims;
    double dx_nm = 0.0;
    std::array<std::vector<std::complex<double>>, 3> e;

    static VectorField zeros(GridDims dims, double dx_nm)
    {
        VectorField f;
        f.dims = dims;
        f.dx_nm = dx_nm;
        for (auto &c : f.e)
        {
            c.assign(dims.size(), {0.0, 0.0});
        }
        return f;
    }

    void scale(double s)
    {
        for (auto &c : e)
        {
            for (auto &v : c)
            {
                v *= s;
            }
        }
    }
};

} // namespace phc
