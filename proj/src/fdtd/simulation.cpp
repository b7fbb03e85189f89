#include "phc/errors.hpp"
#include "phc/fdtd.hpp"
#include "phc/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace phc
{
namespace
{
constexpr int kEx = 0;
constexpr int kEy = 1;
constexpr int kEz = 2;
constexpr int kHx = 3;
constexpr int kHy = 4;
constexpr int kHz = 5;

// Padded layout: one ghost layer on every face, z fastest.
struct Layout
{
    int ni = 0;
    int nj = 0;
    int nk = 0;
    std::size_t sx = 0;
    std::size_t sy = 0;
    std::size_t total = 0;

    explicit Layout(GridDims d) : ni(d.nx), nj(d.ny), nk(d.nz)
    {
        sy = static_cast<std::size_t>(nk + 2);
        sx = static_cast<std::size_t>(nj + 2) * sy;
        total = static_cast<std::size_t>(ni + 2) * sx;
    }
    std::size_t at(int i, int j, int k) const
    {
        return static_cast<std::size_t>(i + 1) * sx + static_cast<std::size_t>(j + 1) * sy +
               static_cast<std::size_t>(k + 1);
    }
    std::size_t stride(int axis) const { return axis == 0 ? sx : (axis == 1 ? sy : 1); }
    int extent(int axis) const { return axis == 0 ? ni : (axis == 1 ? nj : nk); }
};

struct ActiveSource
{
    int field = 0;
    std::size_t index = 0;
    double coefficient = 0.0;
    PulseShape pulse;
};

struct PointProbe
{
    int field = 0;
    std::size_t index = 0;
    double sign = 1.0;
    int decimation = 1;
    int start = 0;
    PointSeries series;
};

struct SnapshotProbe
{
    MonitorSpec spec;
    // local index range [lo, hi) per axis
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    std::vector<Snapshot> taken;
};

struct DftAccumulator
{
    DftSpec spec;
    double omega = 0.0;
    std::array<std::vector<std::complex<double>>, 3> sum;
};

} // namespace

struct CpmlSlab
{
    int axis = 0;
    int begin = 0;
    int count = 0;
    // Profiles for derivatives used by E updates (node positions) and by H updates (half positions).
    std::vector<double> b_e, c_e, kinv_e;
    std::vector<double> b_h, c_h, kinv_h;
    // psi for E_{c1}, E_{c2}, H_{c1}, H_{c2} with c1 = axis+1, c2 = axis+2 (mod 3)
    std::array<std::vector<double>, 4> psi;
    std::array<int, 3> extent{};

    std::size_t slab_index(int i, int j, int k) const
    {
        std::array<int, 3> p{i, j, k};
        p[axis] -= begin;
        return (static_cast<std::size_t>(p[0]) * extent[1] + p[1]) * extent[2] + p[2];
    }
};

struct Simulation::Impl
{
    Layout layout;
    double courant = 0.5;
    std::array<std::vector<double>, 6> f;
    std::array<std::vector<double>, 3> ce;
    std::array<std::vector<double>, 3> eps;
    std::array<int, 3> lo_kind{};  // 0 wall, 1 mirror, 2 periodic
    std::array<int, 3> hi_kind{};  // 0 wall, 2 periodic
    std::array<std::array<double, 6>, 3> mirror_sign{};
    std::vector<CpmlSlab> slabs;
    std::vector<ActiveSource> sources;
    std::vector<PointProbe> probes;
    std::vector<SnapshotProbe> snapshots;
    std::vector<DftAccumulator> dfts;
    WorkerPool pool;
    bool track_energy = false;
    std::array<std::vector<double>, 3> h_prev;
    double dx = 0.0;

    Impl(GridDims dims, int workers) : layout(dims), pool(workers) {}
};

namespace
{
double grade(double depth, double m) { return depth <= 0.0 ? 0.0 : std::pow(depth, m); }

void fill_profile(const CpmlParams &p, double dx, double dt, double depth, double &b, double &c, double &kinv)
{
    const double g = grade(depth, p.m);
    const double sigma = p.resolved_sigma_max(dx) * g;
    const double kappa = 1.0 + (p.kappa_max - 1.0) * g;
    const double alpha = depth > 0.0 ? p.alpha_max * (1.0 - depth) : 0.0;
    b = std::exp(-(sigma / kappa + alpha) * dt);
    const double denom = sigma * kappa + kappa * kappa * alpha;
    c = denom > 0.0 ? sigma * (b - 1.0) / denom : 0.0;
    kinv = 1.0 / kappa - 1.0;
}

} // namespace

Simulation::Simulation(const SimulationConfig &input)
{
    config_ = apply_symmetry(input);
    config_.validate();
    const auto &grid = *config_.grid;
    dims_ = grid.dims;
    dt_ = config_.dt();
    impl_ = std::make_unique<Impl>(dims_, resolve_worker_count(config_.workers));
    Impl &s = *impl_;
    const Layout &L = s.layout;
    s.courant = config_.courant;
    s.dx = config_.dx();
    for (auto &v : s.f)
    {
        v.assign(L.total, 0.0);
    }
    for (int c = 0; c < 3; ++c)
    {
        s.ce[c].assign(L.total, 0.0);
        s.eps[c].assign(L.total, 1.0);
        for (int i = 0; i < L.ni; ++i)
        {
            for (int j = 0; j < L.nj; ++j)
            {
                for (int k = 0; k < L.nk; ++k)
                {
                    const double e = grid.at(c, i, j, k);
                    s.ce[c][L.at(i, j, k)] = s.courant / e;
                    s.eps[c][L.at(i, j, k)] = e;
                }
            }
        }
    }

    // Boundary kinds and mirror signs.
    for (int d = 0; d < 3; ++d)
    {
        s.lo_kind[d] = config_.periodic[d] ? 2 : (config_.reduced[d] ? 1 : 0);
        s.hi_kind[d] = config_.periodic[d] ? 2 : 0;
        for (int c = 0; c < 6; ++c)
        {
            s.mirror_sign[d][c] =
                config_.reduced[d] ? component_parity(static_cast<Component>(c), d, config_.symmetry.planes[d]) : 1.0;
        }
    }

    // Absorber slabs.
    const int T = config_.cpml.thickness;
    if (T > 0)
    {
        for (int d = 0; d < 3; ++d)
        {
            if (config_.periodic[d])
            {
                continue;
            }
            const int n = L.extent(d);
            for (int side = 0; side < 2; ++side)
            {
                if (side == 0 && config_.reduced[d])
                {
                    continue;
                }
                CpmlSlab slab;
                slab.axis = d;
                slab.begin = side == 0 ? 0 : n - T;
                slab.count = T;
                slab.extent = {L.ni, L.nj, L.nk};
                slab.extent[d] = T;
                for (auto *v : {&slab.b_e, &slab.c_e, &slab.kinv_e, &slab.b_h, &slab.c_h, &slab.kinv_h})
                {
                    v->resize(T);
                }
                for (int p = 0; p < T; ++p)
                {
                    const double node = slab.begin + p;
                    const double half = node + 0.5;
                    const double dn = side == 0 ? (T - node) / T : (node - (n - T)) / T;
                    const double dh = side == 0 ? (T - half) / T : (half - (n - T)) / T;
                    fill_profile(config_.cpml, s.dx, dt_, dn, slab.b_e[p], slab.c_e[p], slab.kinv_e[p]);
                    fill_profile(config_.cpml, s.dx, dt_, dh, slab.b_h[p], slab.c_h[p], slab.kinv_h[p]);
                }
                const std::size_t vol =
                    static_cast<std::size_t>(slab.extent[0]) * slab.extent[1] * static_cast<std::size_t>(slab.extent[2]);
                for (auto &psi : slab.psi)
                {
                    psi.assign(vol, 0.0);
                }
                s.slabs.push_back(std::move(slab));
            }
        }
    }

    // Map a physical position to the local sample index of component c.
    auto locate = [&](const std::array<double, 3> &pos, Component c, bool interior_only, double &sign,
                      const std::string &what) {
        const auto off = yee_offset(c);
        std::array<int, 3> idx{};
        sign = 1.0;
        for (int d = 0; d < 3; ++d)
        {
            double p = pos[d];
            if (config_.reduced[d] && p < grid.origin_nm[d])
            {
                p = 2.0 * grid.origin_nm[d] - p;
                sign *= s.mirror_sign[d][static_cast<int>(c)];
            }
            // Round symmetrically about x = 0 so mirror-image positions land on
            // mirror-image samples.
            const int centre = static_cast<int>(std::lround(-grid.origin_nm[d] / grid.dx_nm));
            const double u = std::abs(p) / grid.dx_nm - off[d];
            int m = static_cast<int>(std::lround(u));
            if (p < 0.0)
            {
                m = off[d] > 0.0 ? -1 - m : -m;
            }
            idx[d] = centre + m;
            const int n = L.extent(d);
            if (config_.periodic[d])
            {
                idx[d] = ((idx[d] % n) + n) % n;
            }
            int lo = 0;
            int hi = n;
            if (interior_only && !config_.periodic[d] && T > 0)
            {
                lo = config_.reduced[d] ? 0 : T;
                hi = n - T;
            }
            if (idx[d] < lo || idx[d] >= hi)
            {
                throw SetupError(what + " lies outside the " + (interior_only ? "non-absorbing " : "") +
                                 "simulation region");
            }
        }
        return L.at(idx[0], idx[1], idx[2]);
    };

    for (const auto &src : config_.sources)
    {
        ActiveSource a;
        a.field = static_cast<int>(src.component);
        if (!is_electric(src.component))
        {
            throw SetupError("only electric-current sources are supported");
        }
        double sign = 1.0;
        a.index = locate(src.position_nm, src.component, false, sign, "source");
        a.pulse = make_pulse(src, config_.a_nm);
        // J enters as E -= (dt / eps) J
        a.coefficient = -sign * s.ce[a.field][a.index] * s.dx;
        s.sources.push_back(a);
    }

    std::size_t output_bytes = 0;
    const int steps = config_.steps;
    for (const auto &m : config_.monitors)
    {
        const int records = steps >= m.start_step ? (steps - m.start_step) / m.decimation + 1 : 0;
        if (m.kind == MonitorKind::kPointTimeSeries)
        {
            for (Component c : m.components)
            {
                PointProbe p;
                p.field = static_cast<int>(c);
                p.index = locate(m.position_nm, c, true, p.sign, "monitor '" + m.name + "'");
                p.decimation = m.decimation;
                p.start = m.start_step;
                p.series.name = m.name;
                p.series.component = c;
                p.series.position_nm = m.position_nm;
                s.probes.push_back(std::move(p));
                output_bytes += static_cast<std::size_t>(records) * 3 * sizeof(double);
            }
        }
        else
        {
            SnapshotProbe p;
            p.spec = m;
            p.lo = {0, 0, 0};
            p.hi = {L.ni, L.nj, L.nk};
            if (m.kind == MonitorKind::kPlaneSnapshot)
            {
                const int d = m.plane_axis;
                double sign = 1.0;
                const auto idx = locate(m.position_nm, m.components.front(), false, sign, "monitor '" + m.name + "'");
                const int along = d == 0 ? static_cast<int>(idx / L.sx) - 1
                                         : (d == 1 ? static_cast<int>((idx % L.sx) / L.sy) - 1
                                                   : static_cast<int>(idx % L.sy) - 1);
                p.lo[d] = along;
                p.hi[d] = along + 1;
            }
            const std::size_t cells = static_cast<std::size_t>(p.hi[0] - p.lo[0]) * (p.hi[1] - p.lo[1]) *
                                      static_cast<std::size_t>(p.hi[2] - p.lo[2]);
            output_bytes += static_cast<std::size_t>(records) * cells * m.components.size() * sizeof(double);
            s.snapshots.push_back(std::move(p));
        }
    }
    for (const auto &d : config_.dfts)
    {
        DftAccumulator acc;
        acc.spec = d;
        acc.omega = 2.0 * kPi * d.frequency;
        for (auto &v : acc.sum)
        {
            v.assign(dims_.size(), {0.0, 0.0});
        }
        output_bytes += 3 * dims_.size() * sizeof(std::complex<double>);
        s.dfts.push_back(std::move(acc));
    }
    if (output_bytes > config_.output_budget_bytes)
    {
        throw SizingError("monitor output of " + std::to_string(output_bytes) + " bytes exceeds the budget of " +
                              std::to_string(config_.output_budget_bytes),
                          output_bytes);
    }
}

Simulation::~Simulation() = default;

namespace
{
void fill_e_ghosts(Simulation::Impl &s)
{
    const Layout &L = s.layout;
    // H updates read E at index n along each axis; only periodic axes need a copy.
    for (int d = 0; d < 3; ++d)
    {
        if (s.hi_kind[d] != 2)
        {
            continue;
        }
        const int n = L.extent(d);
        for (int c = 0; c < 3; ++c)
        {
            if (c == d)
            {
                continue;
            }
            auto &v = s.f[c];
            for (int a = 0; a < L.extent((d + 1) % 3); ++a)
            {
                for (int b = 0; b < L.extent((d + 2) % 3); ++b)
                {
                    std::array<int, 3> dst{};
                    dst[d] = n;
                    dst[(d + 1) % 3] = a;
                    dst[(d + 2) % 3] = b;
                    std::array<int, 3> src = dst;
                    src[d] = 0;
                    v[L.at(dst[0], dst[1], dst[2])] = v[L.at(src[0], src[1], src[2])];
                }
            }
        }
    }
}

void fill_h_ghosts(Simulation::Impl &s)
{
    const Layout &L = s.layout;
    for (int d = 0; d < 3; ++d)
    {
        if (s.lo_kind[d] == 0)
        {
            continue;
        }
        const int n = L.extent(d);
        for (int c = 3; c < 6; ++c)
        {
            if (c - 3 == d)
            {
                continue;
            }
            auto &v = s.f[c];
            const double sign = s.mirror_sign[d][c];
            for (int a = 0; a < L.extent((d + 1) % 3); ++a)
            {
                for (int b = 0; b < L.extent((d + 2) % 3); ++b)
                {
                    std::array<int, 3> dst{};
                    dst[d] = -1;
                    dst[(d + 1) % 3] = a;
                    dst[(d + 2) % 3] = b;
                    std::array<int, 3> src = dst;
                    if (s.lo_kind[d] == 1)
                    {
                        src[d] = 0;
                        v[L.at(dst[0], dst[1], dst[2])] = sign * v[L.at(src[0], src[1], src[2])];
                    }
                    else
                    {
                        src[d] = n - 1;
                        v[L.at(dst[0], dst[1], dst[2])] = v[L.at(src[0], src[1], src[2])];
                    }
                }
            }
        }
    }
}

// Zero field components that must vanish on the low face of each axis:
// tangential E on a conducting wall, and parity-odd node samples on a mirror.
void enforce_low_faces(Simulation::Impl &s, bool electric)
{
    const Layout &L = s.layout;
    for (int d = 0; d < 3; ++d)
    {
        if (s.lo_kind[d] == 2)
        {
            continue;
        }
        for (int c = electric ? 0 : 3; c < (electric ? 3 : 6); ++c)
        {
            const bool node = on_node_plane(static_cast<Component>(c), d);
            if (!node)
            {
                continue;
            }
            bool zero = false;
            if (s.lo_kind[d] == 0)
            {
                zero = electric;
            }
            else
            {
                zero = s.mirror_sign[d][c] < 0.0;
            }
            if (!zero)
            {
                continue;
            }
            auto &v = s.f[c];
            for (int a = 0; a < L.extent((d + 1) % 3); ++a)
            {
                for (int b = 0; b < L.extent((d + 2) % 3); ++b)
                {
                    std::array<int, 3> p{};
                    p[d] = 0;
                    p[(d + 1) % 3] = a;
                    p[(d + 2) % 3] = b;
                    v[L.at(p[0], p[1], p[2])] = 0.0;
                }
            }
        }
    }
}

void update_h(Simulation::Impl &s)
{
    const Layout &L = s.layout;
    const double S = s.courant;
    double *ex = s.f[kEx].data();
    double *ey = s.f[kEy].data();
    double *ez = s.f[kEz].data();
    double *hx = s.f[kHx].data();
    double *hy = s.f[kHy].data();
    double *hz = s.f[kHz].data();
    const std::size_t sx = L.sx;
    const std::size_t sy = L.sy;
    const int nj = L.nj;
    const int nk = L.nk;
    s.pool.parallel_for(0, L.ni, [&](int i0, int i1) {
        for (int i = i0; i < i1; ++i)
        {
            for (int j = 0; j < nj; ++j)
            {
                const std::size_t base = L.at(i, j, 0);
                double *__restrict hxr = hx + base;
                double *__restrict hyr = hy + base;
                double *__restrict hzr = hz + base;
                const double *__restrict exr = ex + base;
                const double *__restrict eyr = ey + base;
                const double *__restrict ezr = ez + base;
                const double *__restrict ezy = ez + base + sy;
                const double *__restrict ezx = ez + base + sx;
                const double *__restrict eyx = ey + base + sx;
                const double *__restrict exy = ex + base + sy;
                for (int k = 0; k < nk; ++k)
                {
                    hxr[k] -= S * ((ezy[k] - ezr[k]) - (eyr[k + 1] - eyr[k]));
                    hyr[k] -= S * ((exr[k + 1] - exr[k]) - (ezx[k] - ezr[k]));
                    hzr[k] -= S * ((eyx[k] - eyr[k]) - (exy[k] - exr[k]));
                }
            }
        }
    });
}

void update_e(Simulation::Impl &s)
{
    const Layout &L = s.layout;
    double *ex = s.f[kEx].data();
    double *ey = s.f[kEy].data();
    double *ez = s.f[kEz].data();
    const double *hx = s.f[kHx].data();
    const double *hy = s.f[kHy].data();
    const double *hz = s.f[kHz].data();
    const double *cx = s.ce[0].data();
    const double *cy = s.ce[1].data();
    const double *cz = s.ce[2].data();
    const std::size_t sx = L.sx;
    const std::size_t sy = L.sy;
    const int nj = L.nj;
    const int nk = L.nk;
    s.pool.parallel_for(0, L.ni, [&](int i0, int i1) {
        for (int i = i0; i < i1; ++i)
        {
            for (int j = 0; j < nj; ++j)
            {
                const std::size_t base = L.at(i, j, 0);
                double *__restrict exr = ex + base;
                double *__restrict eyr = ey + base;
                double *__restrict ezr = ez + base;
                const double *__restrict hxr = hx + base;
                const double *__restrict hyr = hy + base;
                const double *__restrict hzr = hz + base;
                const double *__restrict hzy = hz + base - sy;
                const double *__restrict hzx = hz + base - sx;
                const double *__restrict hyx = hy + base - sx;
                const double *__restrict hxy = hx + base - sy;
                const double *__restrict cxr = cx + base;
                const double *__restrict cyr = cy + base;
                const double *__restrict czr = cz + base;
                for (int k = 0; k < nk; ++k)
                {
                    exr[k] += cxr[k] * ((hzr[k] - hzy[k]) - (hyr[k] - hyr[k - 1]));
                    eyr[k] += cyr[k] * ((hxr[k] - hxr[k - 1]) - (hzr[k] - hzx[k]));
                    ezr[k] += czr[k] * ((hyr[k] - hyx[k]) - (hxr[k] - hxy[k]));
                }
            }
        }
    });
}

// Absorber correction for one slab: replaces the plain difference by
// difference / kappa + psi for the four curl terms along the slab axis.
void correct_slab(Simulation::Impl &s, CpmlSlab &slab, bool electric)
{
    const Layout &L = s.layout;
    const int d = slab.axis;
    const int c1 = (d + 1) % 3;
    const int c2 = (d + 2) % 3;
    const std::size_t st = L.stride(d);
    // (target, source, sign, psi slot)
    struct Term
    {
        int target;
        int source;
        double sign;
        int slot;
    };
    std::array<Term, 2> terms{};
    if (electric)
    {
        terms = {Term{c1, 3 + c2, -1.0, 0}, Term{c2, 3 + c1, 1.0, 1}};
    }
    else
    {
        terms = {Term{3 + c1, c2, 1.0, 2}, Term{3 + c2, c1, -1.0, 3}};
    }
    const auto &bp = electric ? slab.b_e : slab.b_h;
    const auto &cp = electric ? slab.c_e : slab.c_h;
    const auto &kp = electric ? slab.kinv_e : slab.kinv_h;
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{L.ni, L.nj, L.nk};
    lo[d] = slab.begin;
    hi[d] = slab.begin + slab.count;
    const double S = s.courant;
    s.pool.parallel_for(lo[0], hi[0], [&](int i0, int i1) {
        for (const Term &t : terms)
        {
            double *target = s.f[t.target].data();
            const double *source = s.f[t.source].data();
            const double *coef = electric ? s.ce[t.target].data() : nullptr;
            double *psi = slab.psi[t.slot].data();
            for (int i = i0; i < i1; ++i)
            {
                for (int j = lo[1]; j < hi[1]; ++j)
                {
                    const std::size_t base = L.at(i, j, 0);
                    const std::size_t pbase = slab.slab_index(i, j, lo[2]);
                    for (int k = lo[2]; k < hi[2]; ++k)
                    {
                        const std::size_t n = base + static_cast<std::size_t>(k);
                        const int p = (d == 0 ? i : (d == 1 ? j : k)) - slab.begin;
                        const double diff = electric ? source[n] - source[n - st] : source[n + st] - source[n];
                        double &ps = psi[pbase + static_cast<std::size_t>(k - lo[2])];
                        ps = bp[p] * ps + cp[p] * diff;
                        const double c = electric ? coef[n] : S;
                        target[n] += c * t.sign * (kp[p] * diff + ps);
                    }
                }
            }
        }
    });
}

void check_finite(const Simulation::Impl &s, int step)
{
    const Layout &L = s.layout;
    for (int c = 0; c < 6; ++c)
    {
        const auto &v = s.f[c];
        for (std::size_t n = 0; n < v.size(); ++n)
        {
            if (!std::isfinite(v[n]))
            {
                const int i = static_cast<int>(n / L.sx) - 1;
                const int j = static_cast<int>((n % L.sx) / L.sy) - 1;
                const int k = static_cast<int>(n % L.sy) - 1;
                std::ostringstream os;
                os << "field diverged at step " << step << ": " << component_name(static_cast<Component>(c))
                   << " is not finite at cell (" << i << ", " << j << ", " << k << ")";
                throw DivergenceError(os.str());
            }
        }
    }
}

} // namespace

void Simulation::step()
{
    Impl &s = *impl_;
    const Layout &L = s.layout;
    if (s.track_energy)
    {
        for (int c = 0; c < 3; ++c)
        {
            s.h_prev[c] = s.f[3 + c];
        }
    }

    fill_e_ghosts(s);
    update_h(s);
    for (auto &slab : s.slabs)
    {
        correct_slab(s, slab, false);
    }
    enforce_low_faces(s, false);

    const double t_h = (step_ + 0.5) * dt_;
    const double t_e = (step_ + 1) * dt_;
    const int next = step_ + 1;
    auto record = [&](PointProbe &p, double t) {
        if (next >= p.start && (next - p.start) % p.decimation == 0)
        {
            p.series.step.push_back(next);
            p.series.time_fs.push_back(normalized_time_to_fs(t, config_.a_nm));
            p.series.value.push_back(p.sign * s.f[p.field][p.index]);
        }
    };
    for (auto &p : s.probes)
    {
        if (p.field >= 3)
        {
            record(p, t_h);
        }
    }

    fill_h_ghosts(s);
    update_e(s);
    for (auto &slab : s.slabs)
    {
        correct_slab(s, slab, true);
    }
    for (const auto &src : s.sources)
    {
        s.f[src.field][src.index] += src.coefficient * src.pulse.value(t_h);
    }
    enforce_low_faces(s, true);

    step_ = next;
    for (auto &p : s.probes)
    {
        if (p.field < 3)
        {
            record(p, t_e);
        }
    }
    for (auto &acc : s.dfts)
    {
        if (step_ < acc.spec.start_step || (step_ - acc.spec.start_step) % acc.spec.stride != 0)
        {
            continue;
        }
        const std::complex<double> w = std::polar(acc.spec.stride * dt_, acc.omega * t_e);
        const GridDims d = dims_;
        s.pool.parallel_for(0, d.nx, [&](int i0, int i1) {
            for (int c = 0; c < 3; ++c)
            {
                const double *e = s.f[c].data();
                auto *out = acc.sum[c].data();
                for (int i = i0; i < i1; ++i)
                {
                    for (int j = 0; j < d.ny; ++j)
                    {
                        const std::size_t src = L.at(i, j, 0);
                        const std::size_t dst = d.index(i, j, 0);
                        for (int k = 0; k < d.nz; ++k)
                        {
                            out[dst + k] += w * e[src + k];
                        }
                    }
                }
            }
        });
    }
    for (auto &snap : s.snapshots)
    {
        const auto &m = snap.spec;
        if (step_ < m.start_step || (step_ - m.start_step) % m.decimation != 0)
        {
            continue;
        }
        Snapshot shot;
        shot.name = m.name;
        shot.step = step_;
        shot.dims = {snap.hi[0] - snap.lo[0], snap.hi[1] - snap.lo[1], snap.hi[2] - snap.lo[2]};
        shot.dx_nm = config_.grid->dx_nm;
        for (int d = 0; d < 3; ++d)
        {
            shot.origin_nm[d] = config_.grid->origin_nm[d] + snap.lo[d] * shot.dx_nm;
        }
        shot.components = m.components;
        for (Component c : m.components)
        {
            std::vector<double> data(shot.dims.size());
            const auto &v = s.f[static_cast<int>(c)];
            for (int i = 0; i < shot.dims.nx; ++i)
            {
                for (int j = 0; j < shot.dims.ny; ++j)
                {
                    for (int k = 0; k < shot.dims.nz; ++k)
                    {
                        data[shot.dims.index(i, j, k)] = v[L.at(i + snap.lo[0], j + snap.lo[1], k + snap.lo[2])];
                    }
                }
            }
            shot.data.push_back(std::move(data));
        }
        snap.taken.push_back(std::move(shot));
    }

    const int interval = std::max(1, config_.divergence_check_interval);
    if (step_ % interval == 0 || step_ == config_.steps)
    {
        check_finite(s, step_);
    }
    else
    {
        for (const auto &p : s.probes)
        {
            if (!p.series.value.empty() && !std::isfinite(p.series.value.back()))
            {
                check_finite(s, step_);
            }
        }
    }
}

void Simulation::add_dft(const DftSpec &spec)
{
    if (spec.stride < 1 || spec.start_step < 0 || !(spec.frequency > 0.0))
    {
        throw SetupError("DFT needs stride >= 1, start_step >= 0 and a positive frequency");
    }
    DftAccumulator acc;
    acc.spec = spec;
    acc.omega = 2.0 * kPi * spec.frequency;
    for (auto &v : acc.sum)
    {
        v.assign(dims_.size(), {0.0, 0.0});
    }
    impl_->dfts.push_back(std::move(acc));
}

void Simulation::run(int steps)
{
    for (int n = 0; n < steps; ++n)
    {
        step();
    }
}

double Simulation::value(Component c, int i, int j, int k) const
{
    return impl_->f[static_cast<int>(c)][impl_->layout.at(i, j, k)];
}

VectorField Simulation::e_field() const
{
    VectorField out = VectorField::zeros(dims_, config_.grid->dx_nm);
    const Layout &L = impl_->layout;
    for (int c = 0; c < 3; ++c)
    {
        for (int i = 0; i < dims_.nx; ++i)
        {
            for (int j = 0; j < dims_.ny; ++j)
            {
                for (int k = 0; k < dims_.nz; ++k)
                {
                    out.e[c][dims_.index(i, j, k)] = impl_->f[c][L.at(i, j, k)];
                }
            }
        }
    }
    return out;
}

void Simulation::zero_fields()
{
    for (auto &v : impl_->f)
    {
        std::fill(v.begin(), v.end(), 0.0);
    }
    for (auto &slab : impl_->slabs)
    {
        for (auto &psi : slab.psi)
        {
            std::fill(psi.begin(), psi.end(), 0.0);
        }
    }
}

double Simulation::electric_energy() const
{
    const Layout &L = impl_->layout;
    double sum = 0.0;
    for (int c = 0; c < 3; ++c)
    {
        for (int i = 0; i < dims_.nx; ++i)
        {
            for (int j = 0; j < dims_.ny; ++j)
            {
                for (int k = 0; k < dims_.nz; ++k)
                {
                    const std::size_t n = L.at(i, j, k);
                    sum += impl_->eps[c][n] * impl_->f[c][n] * impl_->f[c][n];
                }
            }
        }
    }
    const double dv = impl_->dx * impl_->dx * impl_->dx;
    return 0.5 * sum * dv;
}

void Simulation::track_energy(bool on)
{
    impl_->track_energy = on;
    if (on)
    {
        for (int c = 0; c < 3; ++c)
        {
            impl_->h_prev[c] = impl_->f[3 + c];
        }
    }
}

double Simulation::magnetic_energy() const
{
    if (!impl_->track_energy)
    {
        throw std::logic_error("magnetic_energy requires track_energy(true) before stepping");
    }
    const Layout &L = impl_->layout;
    double sum = 0.0;
    for (int c = 0; c < 3; ++c)
    {
        for (int i = 0; i < dims_.nx; ++i)
        {
            for (int j = 0; j < dims_.ny; ++j)
            {
                for (int k = 0; k < dims_.nz; ++k)
                {
                    const std::size_t n = L.at(i, j, k);
                    sum += impl_->h_prev[c][n] * impl_->f[3 + c][n];
                }
            }
        }
    }
    const double dv = impl_->dx * impl_->dx * impl_->dx;
    return 0.5 * sum * dv;
}

double Simulation::field_norm() const
{
    const Layout &L = impl_->layout;
    double sum = 0.0;
    for (int c = 0; c < 6; ++c)
    {
        for (int i = 0; i < dims_.nx; ++i)
        {
            for (int j = 0; j < dims_.ny; ++j)
            {
                for (int k = 0; k < dims_.nz; ++k)
                {
                    const double v = impl_->f[c][L.at(i, j, k)];
                    sum += v * v;
                }
            }
        }
    }
    return std::sqrt(sum);
}

MonitorRecords Simulation::records() const
{
    MonitorRecords r;
    for (const auto &p : impl_->probes)
    {
        r.series.push_back(p.series);
    }
    for (const auto &s : impl_->snapshots)
    {
        r.snapshots.insert(r.snapshots.end(), s.taken.begin(), s.taken.end());
    }
    for (const auto &acc : impl_->dfts)
    {
        VectorField v;
        v.dims = dims_;
        v.dx_nm = config_.grid->dx_nm;
        v.e = acc.sum;
        r.dfts.push_back(std::move(v));
    }
    return r;
}

MonitorRecords run(const SimulationConfig &config)
{
    Simulation sim(config);
    sim.run(sim.config().steps);
    return sim.records();
}

void write_series_csv(const std::string &path, const PointSeries &series)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "step,t_fs,value\n" << std::setprecision(17);
    for (std::size_t n = 0; n < series.value.size(); ++n)
    {
        out << series.step[n] << ',' << series.time_fs[n] << ',' << series.value[n] << '\n';
    }
}

} // namespace phc
