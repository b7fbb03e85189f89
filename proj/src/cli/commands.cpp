#include "phc/cli.hpp"
#include "phc/errors.hpp"
#include "phc/units.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef PHC_VERSION
#define PHC_VERSION "0.0.0"
#endif

namespace phc
{
using nlohmann::json;
namespace fs = std::filesystem;

std::string code_version() { return PHC_VERSION; }

int resolve_workers(int requested)
{
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char *cap = std::getenv("PHC_THREADS"))
    {
        char *end = nullptr;
        const long v = std::strtol(cap, &end, 10);
        if (end != cap && *end == '\0' && v > 0)
        {
            n = std::min<long>(n, v);
        }
    }
    return std::max(1, n);
}

namespace
{
fs::path prepare_directory(const std::string &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
    {
        throw ConfigError("output.directory", "cannot create " + dir);
    }
    const fs::path probe = fs::path(dir) / ".phc_write_test";
    {
        std::ofstream t(probe);
        if (!t)
        {
            throw ConfigError("output.directory", dir + " is not writable");
        }
    }
    fs::remove(probe, ec);
    return fs::path(dir);
}

json manifest_head(const std::string &command, const RunConfig &config)
{
    json m;
    m["format"] = "phc-manifest";
    m["manifest_version"] = 1;
    m["code_version"] = code_version();
    m["command"] = command;
    m["config"] = to_json(config);
    return m;
}

void write_manifest(const fs::path &dir, const json &manifest)
{
    std::ofstream out(dir / "manifest.json");
    if (!out)
    {
        throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    }
    out << manifest.dump(2) << '\n';
}

json dims_json(const GridDims &d) { return json::array({d.nx, d.ny, d.nz}); }

json mode_json(const ResonantMode &m)
{
    return {{"wavelength_nm", m.wavelength_nm}, {"Q", m.Q}, {"amplitude", m.amplitude}, {"phase_rad", m.phase}};
}

std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
    {
        return s;
    }
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
        {
            out += "\"\"";
        }
        else
        {
            out += c == '\n' ? ' ' : c;
        }
    }
    return out + "\"";
}

void write_series(const fs::path &path, const PointSeries &s, int decimation)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "step,t_fs,value\n" << std::setprecision(17);
    for (std::size_t n = 0; n < s.value.size(); n += static_cast<std::size_t>(decimation))
    {
        out << s.step[n] << ',' << s.time_fs[n] << ',' << s.value[n] << '\n';
    }
}

// First sample at or after the source gate.
std::size_t gate_index(const std::vector<double> &time_fs, double gate_fs)
{
    std::size_t i = 0;
    while (i < time_fs.size() && time_fs[i] < gate_fs)
    {
        ++i;
    }
    return i;
}

struct SpectralSummary
{
    Spectrum spectrum;
    std::optional<LorentzianFit> fit;
    std::optional<std::string> fit_error;
};

std::optional<SpectralSummary> spectral_analysis(std::span<const double> tail, double dt_fs,
                                                 std::array<double, 2> band, const AnalysisSettings &an,
                                                 std::optional<double> guess_nm)
{
    if (tail.size() < 16)
    {
        return std::nullopt;
    }
    SpectrumOptions so;
    so.window = an.window;
    so.quantity = SpectralQuantity::kPower;
    so.padding = an.padding;
    so.band_nm = band;
    SpectralSummary out{spectrum_from_series(tail, dt_fs, so), std::nullopt, std::nullopt};
    if (an.lorentzian && guess_nm && out.spectrum.wavelength_nm.size() >= 5)
    {
        try
        {
            out.fit = lorentzian_fit(out.spectrum, *guess_nm);
        }
        catch (const NumericsError &e)
        {
            out.fit_error = e.what();
        }
    }
    return out;
}

json fit_json(const SpectralSummary &s)
{
    if (s.fit)
    {
        return {{"lambda0_nm", s.fit->lambda0_nm}, {"fwhm_nm", s.fit->fwhm_nm},   {"Q", s.fit->Q},
                {"peak", s.fit->peak},             {"background", s.fit->background}, {"residual_norm", s.fit->residual_norm}};
    }
    return {{"error", s.fit_error.value_or("no fit requested")}};
}

void print_modes(const std::vector<ResonantMode> &modes, std::optional<std::size_t> fundamental)
{
    if (modes.empty())
    {
        std::cout << "no resonances found in the analysis band\n";
        return;
    }
    for (std::size_t i = 0; i < modes.size(); ++i)
    {
        std::printf("%s lambda %.3f nm  Q %.1f  amplitude %.4g\n", fundamental && *fundamental == i ? "*" : " ",
                    modes[i].wavelength_nm, modes[i].Q, modes[i].amplitude);
    }
}

double gate_time_fs(const CavityRunSettings &run, double gate_cutoffs)
{
    SourceSpec src;
    src.center_wavelength_nm = run.device.target_wavelength_nm;
    src.bandwidth_nm = run.source_bandwidth_nm;
    const double a = run.device.lattice.a_nm;
    return gate_cutoffs * make_pulse(src, a).cutoff * a / kSpeedOfLightNmPerFs;
}

} // namespace

int cmd_generate(const RunConfig &config)
{
    const DeviceSpec &device = config.run.device;
    RasterOptions raster;
    raster.resolution = config.run.resolution;
    raster.boundary_cells = config.run.cpml.thickness;
    raster.memory_budget_bytes = config.run.memory_budget_bytes;
    const GridDims dims = raster_dims(device, raster);
    // eps (3) + E, H (6) + curl scratch, all doubles.
    const double grid_mib = 3.0 * static_cast<double>(dims.size()) * 8.0 / 1048576.0;
    const double sim_mib = 9.0 * static_cast<double>(dims.size()) * 8.0 / 1048576.0;
    std::printf("grid %d x %d x %d = %zu cells, dx %.4f nm\n", dims.nx, dims.ny, dims.nz, dims.size(),
                device.lattice.a_nm / config.run.resolution);
    std::printf("permittivity %.1f MiB, full-domain fields about %.1f MiB\n", grid_mib, sim_mib);

    const fs::path dir = prepare_directory(config.output.directory);
    const auto holes = hole_centers(device);
    write_holes_csv((dir / "holes.csv").string(), holes);
    const PermittivityGrid grid = rasterize(device, raster);
    write_phcf((dir / "eps.phcf").string(), permittivity_file(grid));

    json m = manifest_head("generate", config);
    m["derived"] = {{"grid_dims", dims_json(grid.dims)},
                    {"dx_nm", grid.dx_nm},
                    {"origin_nm", grid.origin_nm},
                    {"holes", holes.size()},
                    {"eps_components", json::array({"eps_x", "eps_y", "eps_z"})}};
    m["outputs"] = json::array({"holes.csv", "eps.phcf"});
    m["status"] = "complete";
    write_manifest(dir, m);
    std::printf("wrote %zu holes and eps.phcf to %s\n", holes.size(), dir.string().c_str());
    return kExitOk;
}

int cmd_run(const RunConfig &config)
{
    const fs::path dir = prepare_directory(config.output.directory);
    CavityRunSettings settings = config.run;
    settings.workers = resolve_workers(config.run.workers);
    settings.keep_profile = config.output.phcf;
    json m = manifest_head("run", config);
    m["status"] = "failed";
    m["outputs"] = json::array();

    CavityRunResult r;
    int last_tenth = -1;
    try
    {
        r = run_cavity(settings, [&](int step, int total) {
            const int tenth = total > 0 ? 10 * step / total : 10;
            if (tenth != last_tenth)
            {
                last_tenth = tenth;
                std::fprintf(stderr, "step %d / %d\n", step, total);
            }
        });
    }
    catch (const std::exception &e)
    {
        m["error"] = e.what();
        write_manifest(dir, m);
        throw;
    }

    json outputs = json::array();
    const auto band = settings.band_nm();
    const std::size_t g = std::min<std::size_t>(static_cast<std::size_t>(r.gate_step), r.probe.value.size());
    std::span<const double> tail(r.probe.value.data() + g, r.probe.value.size() - g);
    std::optional<double> guess;
    if (r.fundamental)
    {
        guess = r.modes[*r.fundamental].wavelength_nm;
    }
    const auto spectral = spectral_analysis(tail, r.dt_fs, band, config.analysis, guess);

    if (config.output.csv)
    {
        std::vector<ModeRow> rows;
        for (std::size_t i = 0; i < r.modes.size(); ++i)
        {
            ModeRow row{r.modes[i], std::nullopt, std::nullopt};
            if (r.fundamental && *r.fundamental == i && r.volume)
            {
                row.Vm_normalized = r.volume->Vm_normalized;
                row.purcell = r.purcell;
            }
            rows.push_back(row);
        }
        write_modes_csv((dir / "modes.csv").string(), rows);
        write_series(dir / "series.csv", r.probe, config.output.decimation);
        outputs.push_back("modes.csv");
        outputs.push_back("series.csv");
        Spectrum empty;
        write_spectrum_csv((dir / "spectrum.csv").string(), spectral ? spectral->spectrum : empty);
        outputs.push_back("spectrum.csv");
    }
    if (config.output.phcf)
    {
        RasterOptions raster;
        raster.resolution = settings.resolution;
        raster.boundary_cells = settings.cpml.thickness;
        raster.memory_budget_bytes = settings.memory_budget_bytes;
        write_phcf((dir / "eps.phcf").string(), permittivity_file(rasterize(settings.device, raster)));
        outputs.push_back("eps.phcf");
        if (r.profile)
        {
            FieldFile f;
            f.nx = static_cast<std::uint32_t>(r.profile->dims.nx);
            f.ny = static_cast<std::uint32_t>(r.profile->dims.ny);
            f.nz = static_cast<std::uint32_t>(r.profile->dims.nz);
            f.dx_nm = r.profile->dx_nm;
            for (const auto &c : r.profile->e)
            {
                std::vector<double> re(c.size()), im(c.size());
                for (std::size_t i = 0; i < c.size(); ++i)
                {
                    re[i] = c[i].real();
                    im[i] = c[i].imag();
                }
                f.components.push_back(std::move(re));
                f.components.push_back(std::move(im));
            }
            write_phcf((dir / "mode.phcf").string(), f);
            outputs.push_back("mode.phcf");
        }
    }

    m["derived"] = {{"grid_dims", dims_json(r.full_dims)},
                    {"stored_dims", dims_json(r.stored_dims)},
                    {"dx_nm", r.dx_nm},
                    {"dt_fs", r.dt_fs},
                    {"gate_step", r.gate_step},
                    {"steps_run", r.steps_run},
                    {"band_nm", band},
                    {"dft_a_over_lambda", r.dft_frequency},
                    {"mode_components", json::array({"Ex_re", "Ex_im", "Ey_re", "Ey_im", "Ez_re", "Ez_im"})}};
    json res;
    res["modes"] = json::array();
    for (const auto &mode : r.modes)
    {
        res["modes"].push_back(mode_json(mode));
    }
    if (r.fundamental)
    {
        json f = mode_json(r.modes[*r.fundamental]);
        if (r.volume)
        {
            f["Vm_lambda_n3"] = r.volume->Vm_normalized;
            f["Vm_nm3"] = r.volume->Vm_physical_nm3;
            f["peak_location_nm"] = r.volume->peak_location_nm;
            f["purcell"] = *r.purcell;
            f["dielectric_energy_fraction"] = *r.dielectric_fraction;
        }
        res["fundamental"] = f;
    }
    if (spectral)
    {
        res["lorentzian"] = fit_json(*spectral);
    }
    m["results"] = res;
    json notes = json::array();
    if (r.note)
    {
        notes.push_back(*r.note);
    }
    if (r.inversion_warning)
    {
        notes.push_back(*r.inversion_warning);
    }
    m["notes"] = notes;
    m["outputs"] = outputs;
    m["status"] = "complete";
    write_manifest(dir, m);

    std::printf("grid %d x %d x %d (stored %d x %d x %d), %d steps in %.1f s\n", r.full_dims.nx, r.full_dims.ny,
                r.full_dims.nz, r.stored_dims.nx, r.stored_dims.ny, r.stored_dims.nz, r.steps_run, r.seconds);
    print_modes(r.modes, r.fundamental);
    if (r.volume)
    {
        std::printf("Vm %.4f (lambda/n)^3  Purcell %.1f\n", r.volume->Vm_normalized, *r.purcell);
    }
    if (r.note)
    {
        std::printf("note: %s\n", r.note->c_str());
    }
    return kExitOk;
}

int cmd_sweep(const SweepConfig &sweep)
{
    const fs::path dir = prepare_directory(sweep.base.output.directory);
    const std::size_t n = sweep.values.size();
    struct Row
    {
        std::optional<ResonantMode> mode;
        std::optional<double> vm;
        std::optional<double> purcell;
        std::string error;
    };
    std::vector<Row> rows(n);
    const int jobs = std::max(1, std::min<int>(sweep.parallel_jobs, static_cast<int>(n)));
    const int per_job = std::max(1, resolve_workers(sweep.base.run.workers) / jobs);
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            Row &row = rows[i];
            try
            {
                RunConfig cfg = with_axis_value(sweep.base, sweep.axis, sweep.values[i]);
                CavityRunSettings s = cfg.run;
                s.workers = per_job;
                const CavityRunResult r = run_cavity(s);
                if (r.fundamental)
                {
                    row.mode = r.modes[*r.fundamental];
                    if (r.volume)
                    {
                        row.vm = r.volume->Vm_normalized;
                        row.purcell = r.purcell;
                    }
                }
                else
                {
                    row.error = r.note.value_or("no resonance in the analysis band");
                }
            }
            catch (const std::exception &e)
            {
                row.error = e.what();
            }
            std::lock_guard lock(io);
            std::fprintf(stderr, "%s = %g: %s\n", sweep.axis.c_str(), sweep.values[i],
                         row.mode ? "done" : row.error.c_str());
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool)
    {
        t.join();
    }

    std::ofstream out(dir / "sweep.csv");
    if (!out)
    {
        throw std::runtime_error("cannot write " + (dir / "sweep.csv").string());
    }
    out << "value,wavelength_nm,Q,Vm_lambda_n3,purcell,error\n" << std::setprecision(10);
    json points = json::array();
    std::size_t failed = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const Row &r = rows[i];
        out << sweep.values[i] << ',';
        json p = {{"value", sweep.values[i]}};
        if (r.mode)
        {
            out << r.mode->wavelength_nm << ',' << r.mode->Q;
            p["wavelength_nm"] = r.mode->wavelength_nm;
            p["Q"] = r.mode->Q;
        }
        else
        {
            out << ',';
        }
        out << ',';
        if (r.vm)
        {
            out << *r.vm;
            p["Vm_lambda_n3"] = *r.vm;
        }
        out << ',';
        if (r.purcell)
        {
            out << *r.purcell;
            p["purcell"] = *r.purcell;
        }
        out << ',' << csv_field(r.error) << '\n';
        if (!r.error.empty())
        {
            p["error"] = r.error;
        }
        failed += r.mode ? 0 : 1;
        points.push_back(p);
        std::printf("%s = %g: %s\n", sweep.axis.c_str(), sweep.values[i],
                    r.mode ? (std::to_string(r.mode->wavelength_nm) + " nm, Q " + std::to_string(r.mode->Q)).c_str()
                           : ("failed: " + r.error).c_str());
    }
    out.close();

    json m = manifest_head("sweep", sweep.base);
    m["sweep"] = {{"axis", sweep.axis}, {"values", sweep.values}, {"parallel_jobs", sweep.parallel_jobs}};
    m["results"] = points;
    m["outputs"] = json::array({"sweep.csv"});
    m["status"] = failed == n ? "failed" : (failed ? "partial" : "complete");
    write_manifest(dir, m);
    return failed == n ? kExitSweepFailed : kExitOk;
}

int cmd_bands(const RunConfig &config)
{
    const SlabLattice &sl = config.run.device.lattice;
    const double target = sl.a_nm / config.run.device.target_wavelength_nm;
    const double n_bg = config.bands.background_index.value_or(
        slab_effective_index(sl.n_slab, sl.thickness_nm, config.run.device.target_wavelength_nm));
    Lattice2D lattice;
    lattice.a_nm = sl.a_nm;
    lattice.r_nm = sl.r_nm;
    lattice.eps_bg = n_bg * n_bg;
    lattice.eps_hole = 1.0;
    lattice.validate();
    BandOptions opts;
    opts.n_bands = config.bands.n_bands;
    opts.rule = config.bands.rule;
    opts.workers = resolve_workers(config.run.workers);
    const KPath path = KPath::gamma_m_k_gamma(config.bands.samples_per_segment);
    const BandDiagram diagram = te_bands(lattice, config.bands.n_waves, path, opts);

    const fs::path dir = prepare_directory(config.output.directory);
    write_bands_csv((dir / "bands.csv").string(), diagram);
    json outputs = json::array({"bands.csv"});
    std::vector<GapRow> rows;
    if (!config.bands.gap_map_r_over_a.empty())
    {
        rows = gap_map(lattice, config.bands.gap_map_r_over_a, config.bands.n_waves, path, opts);
        write_gaps_csv((dir / "gap_map.csv").string(), rows);
        outputs.push_back("gap_map.csv");
    }

    std::printf("background index %.4f, %d plane waves, %s rule\n", n_bg, diagram.n_waves, rule_name(opts.rule).c_str());
    bool inside = false;
    json gaps = json::array();
    if (diagram.gaps.empty())
    {
        std::printf("no gap\n");
    }
    for (const auto &g : diagram.gaps)
    {
        std::printf("gap between bands %d and %d: %.4f - %.4f a/lambda (%.2f%%)\n", g.lower_band + 1, g.lower_band + 2,
                    g.lo, g.hi, 200.0 * (g.hi - g.lo) / (g.hi + g.lo));
        inside = inside || (target >= g.lo && target <= g.hi);
        gaps.push_back({{"lower_band", g.lower_band}, {"lo", g.lo}, {"hi", g.hi}});
    }
    std::printf("target %.4f inside gap: %s\n", target, inside ? "true" : "false");

    json m = manifest_head("bands", config);
    m["derived"] = {{"background_index", n_bg}, {"n_waves", diagram.n_waves}, {"target_a_over_lambda", target}};
    m["results"] = {{"gaps", gaps}, {"target_inside_gap", inside}, {"min_eigenvalue", diagram.min_eigenvalue}};
    m["outputs"] = outputs;
    m["status"] = "complete";
    write_manifest(dir, m);
    return kExitOk;
}

int cmd_analyze(const RunConfig &config, const std::string &series_csv)
{
    std::ifstream in(series_csv);
    if (!in)
    {
        throw ConfigError("series", "cannot read " + series_csv);
    }
    std::string line;
    std::getline(in, line);
    if (line != "step,t_fs,value")
    {
        throw ConfigError("series", series_csv + " must start with the header step,t_fs,value");
    }
    std::vector<double> t, v;
    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
        {
            continue;
        }
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
        {
            throw ConfigError("series", series_csv + ":" + std::to_string(lineno) + ": expected three columns");
        }
        try
        {
            t.push_back(std::stod(b));
            v.push_back(std::stod(c));
        }
        catch (const std::exception &)
        {
            throw ConfigError("series", series_csv + ":" + std::to_string(lineno) + ": not a number");
        }
    }
    if (t.size() < 2)
    {
        throw NumericsError("series has fewer than two samples");
    }
    const double dt = t[1] - t[0];
    const auto band = config.run.band_nm();
    const std::size_t g = gate_index(t, gate_time_fs(config.run, config.analysis.gate_cutoffs));
    std::span<const double> tail(v.data() + g, v.size() - g);
    const fs::path dir = prepare_directory(config.output.directory);

    std::vector<ResonantMode> modes;
    std::optional<std::string> warning;
    if (tail.size() >= 1000)
    {
        const auto inv = harmonic_inversion(tail, dt, band, t[g], config.analysis.inversion);
        modes = inv.modes;
        warning = inv.warning;
    }
    std::optional<std::size_t> fundamental;
    if (!modes.empty())
    {
        fundamental = 0;
    }
    const auto spectral = spectral_analysis(
        tail, dt, band, config.analysis, fundamental ? std::optional(modes[0].wavelength_nm) : std::nullopt);
    std::vector<ModeRow> rows;
    for (const auto &mode : modes)
    {
        rows.push_back({mode, std::nullopt, std::nullopt});
    }
    write_modes_csv((dir / "modes.csv").string(), rows);
    Spectrum empty;
    write_spectrum_csv((dir / "spectrum.csv").string(), spectral ? spectral->spectrum : empty);

    json m = manifest_head("analyze", config);
    m["derived"] = {{"series", series_csv}, {"samples", v.size()}, {"gate_index", g}, {"dt_fs", dt}, {"band_nm", band}};
    json res;
    res["modes"] = json::array();
    for (const auto &mode : modes)
    {
        res["modes"].push_back(mode_json(mode));
    }
    if (spectral)
    {
        res["lorentzian"] = fit_json(*spectral);
    }
    m["results"] = res;
    m["notes"] = warning ? json::array({*warning}) : json::array();
    m["outputs"] = json::array({"modes.csv", "spectrum.csv"});
    m["status"] = "complete";
    write_manifest(dir, m);
    print_modes(modes, fundamental);
    if (spectral && spectral->fit)
    {
        std::printf("lorentzian: lambda0 %.3f nm, Q %.1f\n", spectral->fit->lambda0_nm, spectral->fit->Q);
    }
    return kExitOk;
}

} // namespace phc
