#pragma once

#include "phc/field.hpp"
#include "phc/yee.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace phc
{
// Triangular-lattice air-hole slab. Rows run along x; row j sits at
// y = j * (sqrt(3)/2) a and odd rows are offset by a/2.
struct SlabLattice
{
    double a_nm = 214.0;
    double r_nm = 0.285 * 214.0;
    double thickness_nm = 214.0;
    double n_slab = 2.4;
    int nx = 15;
    int ny = 11;
    // Air above and below the slab before the absorber.
    double padding_nm = 446.0;

    void validate() const;
};

// Outward shifts of the three nearest axial holes on each side of an L3
// defect, in units of a.
struct L3Params
{
    double d1 = 0.219;
    double d2 = 0.025;
    double d3 = 0.2;
};

// Line-defect waveguide with a graded axial lattice constant in the core.
struct HeterostructureParams
{
    // Centre-to-centre distance between the two rows bounding the line defect, in units of a.
    double width = 1.69;
    double a1_ratio = 1.025;
    double a2_ratio = 1.05;
    // Periods at a1 on each side of the centre.
    int n_a1 = 2;
    // Periods at a2, centred on the cavity.
    int n_a2 = 1;
};

using Defect = std::variant<std::monostate, L3Params, HeterostructureParams>;

struct DeviceSpec
{
    SlabLattice lattice;
    Defect defect;
    double target_wavelength_nm = 637.0;

    void validate() const;
};

DeviceSpec paper_l3_device();
DeviceSpec paper_heterostructure_device();

struct Hole
{
    double x_nm = 0.0;
    double y_nm = 0.0;
    double r_nm = 0.0;
};

// All hole centres, sorted lexicographically by (x, y). Throws GeometryError on
// overlapping holes or when the layout does not fit the nx x ny footprint.
std::vector<Hole> hole_centers(const DeviceSpec &spec);

// Half-widths of the patterned region (x, y) and of the slab-plus-padding stack (z), in nm.
std::array<double, 3> device_half_extent(const DeviceSpec &spec);

// Axial coordinate of lattice index u on the graded heterostructure axis, in units of a.
double heterostructure_axis_position(const HeterostructureParams &hs, double u);

// Relative permittivity sampled at the three E-component Yee points of every cell.
struct PermittivityGrid
{
    GridDims dims;
    double dx_nm = 0.0;
    // Physical position of node (0,0,0); nodes sit at origin + index * dx.
    std::array<double, 3> origin_nm{0.0, 0.0, 0.0};
    double n_slab = 1.0;
    std::array<std::vector<double>, 3> eps;

    static PermittivityGrid uniform(GridDims dims, double dx_nm, double value = 1.0);

    double at(int component, int i, int j, int k) const { return eps[component][dims.index(i, j, k)]; }
    // Position of the sample of E component `axis` in cell (i,j,k).
    std::array<double, 3> sample_position(int axis, int i, int j, int k) const;
    std::size_t bytes() const { return 3 * dims.size() * sizeof(double); }
};

struct RasterOptions
{
    // Cells per lattice constant.
    double resolution = 16.0;
    // Absorber cells added outside the device region on every face. The slab
    // continues through them; holes do not.
    int boundary_cells = 10;
    std::size_t memory_budget_bytes = std::size_t{4} << 30;
};

// Point-membership and supersampled volume-fraction queries against the
// analytic geometry (slab minus cylindrical holes).
class MaterialIndex
{
public:
    MaterialIndex(std::vector<Hole> holes, double thickness_nm, double bucket_nm);

    bool in_hole(double x, double y) const;
    bool in_slab_z(double z) const { return 2.0 * std::abs(z) <= thickness_nm_; }
    // Fraction of an axis-aligned cube (edge `edge`, centred at p) that is solid,
    // estimated on a samples^3 point lattice.
    double solid_fraction(double x, double y, double z, double edge, int samples = 4) const;
    // In-plane solid fraction of a square of side `edge` centred at (x, y).
    double in_plane_solid_fraction(double x, double y, double edge, int samples = 4) const;
    double z_solid_fraction(double z, double edge, int samples = 4) const;

    const std::vector<Hole> &holes() const { return holes_; }

private:
    std::vector<Hole> holes_;
    double thickness_nm_;
    double bucket_nm_;
    double x0_ = 0.0;
    double y0_ = 0.0;
    int bx_ = 0;
    int by_ = 0;
    std::vector<std::vector<int>> buckets_;
};

// Supersampled (4x4x4) arithmetic volume-fraction averaging of epsilon at each
// E sample point. The grid is centred so the device centre falls on node
// (Nx/2, Ny/2, Nz/2), which keeps symmetric devices bit-for-bit symmetric.
PermittivityGrid rasterize(const DeviceSpec &spec, const RasterOptions &options);

// Grid dimensions and byte count rasterize would produce, without allocating.
GridDims raster_dims(const DeviceSpec &spec, const RasterOptions &options);

// Average in-plane air fraction of one rectangular (a x sqrt(3) a) cell of the
// unperturbed lattice, sampled at `resolution` cells per a with the same
// supersampling rasterize uses.
double air_fill_fraction(const SlabLattice &lattice, double resolution);

inline double analytic_air_fill_fraction(double r_over_a)
{
    return 2.0 * std::numbers::pi * r_over_a * r_over_a / std::sqrt(3.0);
}

// Share of electric energy (eps |E|^2) carried by samples with eps > 1.
double dielectric_energy_fraction(const PermittivityGrid &eps, const VectorField &field);

void write_holes_csv(const std::string &path, std::span<const Hole> holes);

} // namespace phc
