#pragma once

#include "phc/field.hpp"
#include "phc/geometry.hpp"
#include "phc/parallel.hpp"
#include "phc/yee.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace phc
{
// Absorber profile. sigma, kappa follow (depth/thickness)^m grading, alpha is
// linear and vanishes at the outer wall. thickness = 0 leaves a bare conducting wall.
struct CpmlParams
{
    int thickness = 10;
    double m = 3.0;
    // Per unit time in units of c/a; defaults to 0.8 (m + 1) / dx.
    std::optional<double> sigma_max;
    double kappa_max = 3.0;
    double alpha_max = 0.05;

    double resolved_sigma_max(double dx) const;
    void validate() const;
};

enum class Parity
{
    kNone,
    kEven,
    kOdd
};

// Mirror planes through the grid centre. A label is the scalar mirror parity
// of Hz: z-even is the TE-like slab family (in-plane E even across the
// midplane); the fundamental L3 mode with its defect along x is x-odd, y-even.
struct SymmetrySpec
{
    std::array<Parity, 3> planes{Parity::kNone, Parity::kNone, Parity::kNone};

    bool active(int axis) const { return planes[axis] != Parity::kNone; }
    bool any() const { return active(0) || active(1) || active(2); }
};

// +1 or -1: how component c transforms under the mirror normal to `axis`
// with the given Hz-parity label.
int component_parity(Component c, int axis, Parity label);

// Gaussian-envelope sine pulse; its spectrum vanishes at zero frequency.
struct SourceSpec
{
    std::array<double, 3> position_nm{0.0, 0.0, 0.0};
    Component component = Component::Ey;
    double center_wavelength_nm = 637.0;
    // Full width at half maximum of the pulse spectrum, expressed in wavelength.
    double bandwidth_nm = 100.0;
    double amplitude = 1.0;
    // Source is off after this time; defaults to twice the envelope peak delay.
    std::optional<double> start_cutoff_fs;
};

// Normalized-units pulse parameters derived from a SourceSpec.
struct PulseShape
{
    double frequency = 0.0;
    double width = 0.0;
    double peak_time = 0.0;
    double cutoff = 0.0;
    double amplitude = 1.0;

    double value(double t) const;
};
PulseShape make_pulse(const SourceSpec &source, double a_nm);

enum class MonitorKind
{
    kPointTimeSeries,
    kPlaneSnapshot,
    kVolumeSnapshot
};

struct MonitorSpec
{
    std::string name;
    MonitorKind kind = MonitorKind::kPointTimeSeries;
    std::array<double, 3> position_nm{0.0, 0.0, 0.0};
    // Normal axis for plane snapshots.
    int plane_axis = 2;
    std::vector<Component> components{Component::Ey};
    int decimation = 1;
    int start_step = 0;
};

// Running single-frequency transform of every E sample over [start_step, end).
struct DftSpec
{
    double frequency = 0.0;
    int start_step = 0;
    int stride = 1;
};

struct SimulationConfig
{
    std::shared_ptr<const PermittivityGrid> grid;
    // Lattice constant; internal lengths and times are in units of a and a/c.
    double a_nm = 214.0;
    double courant = 0.5;
    int steps = 0;
    CpmlParams cpml;
    SymmetrySpec symmetry;
    // Periodic axes replace both walls and the absorber on that axis.
    std::array<bool, 3> periodic{false, false, false};
    std::vector<SourceSpec> sources;
    std::vector<MonitorSpec> monitors;
    std::vector<DftSpec> dfts;
    int workers = 1;
    std::size_t output_budget_bytes = std::size_t{1} << 30;
    // Steps between full NaN/Inf scans.
    int divergence_check_interval = 64;

    // Set by apply_symmetry: index of the first stored cell in the full grid.
    std::array<int, 3> domain_offset{0, 0, 0};
    std::array<bool, 3> reduced{false, false, false};

    double dx() const { return grid->dx_nm / a_nm; }
    double dt() const { return courant * dx(); }
    double dt_fs() const;
    void validate() const;
};

// Crops the grid to the kept half (x >= 0 etc.) along every active mirror.
// Throws SymmetryError when the grid is not bit-for-bit symmetric about a
// requested plane, or when a source sitting on a plane is forced to zero by
// the requested parity.
SimulationConfig apply_symmetry(const SimulationConfig &config);

struct PointSeries
{
    std::string name;
    Component component = Component::Ey;
    std::array<double, 3> position_nm{};
    std::vector<int> step;
    std::vector<double> time_fs;
    std::vector<double> value;
};

struct Snapshot
{
    std::string name;
    int step = 0;
    GridDims dims;
    double dx_nm = 0.0;
    std::array<double, 3> origin_nm{};
    std::vector<Component> components;
    std::vector<std::vector<double>> data;
};

struct MonitorRecords
{
    std::vector<PointSeries> series;
    std::vector<Snapshot> snapshots;
    std::vector<VectorField> dfts;
};

struct CpmlSlab;

class Simulation
{
public:
    explicit Simulation(const SimulationConfig &config);
    ~Simulation();

    Simulation(const Simulation &) = delete;
    Simulation &operator=(const Simulation &) = delete;

    // One leapfrog step: H to n+1/2, then E to n+1, sources, absorber and monitors.
    void step();
    void run(int steps);
    // Start another running transform; accumulation begins at spec.start_step.
    void add_dft(const DftSpec &spec);

    int current_step() const { return step_; }
    // Time of the most recent E update, in units of a/c.
    double time() const { return step_ * dt_; }
    const SimulationConfig &config() const { return config_; }
    GridDims dims() const { return dims_; }

    double value(Component c, int i, int j, int k) const;
    // Electric field of the stored domain as a (real) VectorField.
    VectorField e_field() const;
    void zero_fields();

    // 1/2 sum(eps |E|^2) dV over the stored domain.
    double electric_energy() const;
    // 1/2 sum(H^{n-1/2} . H^{n+1/2}) dV using the H copy kept by track_energy.
    double magnetic_energy() const;
    void track_energy(bool on);
    double field_norm() const;

    MonitorRecords records() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
    SimulationConfig config_;
    GridDims dims_;
    double dt_ = 0.0;
    int step_ = 0;
};

// Convenience wrapper: build, run config.steps, return the monitors.
MonitorRecords run(const SimulationConfig &config);

// Expand a field stored on the reduced domain back to the full grid using the
// mirror parities of `config`.
VectorField unfold(const VectorField &reduced, const SimulationConfig &config);

// Peak relative amplitude reflected by the absorber for a normally incident
// pulse in vacuum, at `resolution` cells per free-space centre wavelength.
double cpml_reflection_test(double resolution, const CpmlParams &cpml);

// Normal-incidence power transmission through a free-standing slab from two
// quasi-1D runs (with and without the slab).
struct SlabTransmission
{
    double dx_nm = 0.0;
    std::vector<double> wavelength_nm;
    std::vector<double> transmission;
};
SlabTransmission slab_transmission(double n, double thickness_nm, std::array<double, 2> band_nm,
                                   double cells_per_material_wavelength, int samples = 41);

void write_series_csv(const std::string &path, const PointSeries &series);

} // namespace phc
