#include "phc/cli.hpp"
#include "phc/errors.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>

namespace
{
struct Common
{
    std::string config;
    std::string out;
    std::optional<int> jobs;
    std::optional<double> resolution;
    std::optional<std::uint64_t> seed;
    std::string series;
};

void add_common(CLI::App *cmd, Common &c)
{
    cmd->add_option("--config", c.config, "JSON config (or a run manifest)")->required();
    cmd->add_option("--out", c.out, "output directory (overrides output.directory)");
    cmd->add_option("--jobs", c.jobs, "worker threads; parallel points for sweep");
    cmd->add_option("--resolution", c.resolution, "cells per lattice constant (overrides simulation.resolution)");
    cmd->add_option("--seed", c.seed, "seed recorded in the manifest");
}

void apply(phc::RunConfig &cfg, const Common &c, bool jobs_are_workers)
{
    if (!c.out.empty())
    {
        cfg.output.directory = c.out;
    }
    if (c.resolution)
    {
        if (!(*c.resolution > 0.0))
        {
            throw phc::ConfigError("--resolution", "must be positive");
        }
        cfg.run.resolution = *c.resolution;
    }
    if (c.seed)
    {
        cfg.seed = *c.seed;
    }
    if (jobs_are_workers && c.jobs)
    {
        if (*c.jobs < 1)
        {
            throw phc::ConfigError("--jobs", "must be at least 1");
        }
        cfg.run.workers = *c.jobs;
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Photonic-crystal slab cavity simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", phc::code_version());
    Common c;
    auto *generate = app.add_subcommand("generate", "write hole positions and the permittivity grid");
    auto *run = app.add_subcommand("run", "FDTD ring-down, resonances, mode volume and Purcell factor");
    auto *sweep = app.add_subcommand("sweep", "run one parameter over a list of values");
    auto *bands = app.add_subcommand("bands", "2D TE band diagram and gaps");
    auto *analyze = app.add_subcommand("analyze", "re-run the resonance analysis on a stored series");
    for (auto *cmd : {generate, run, sweep, bands, analyze})
    {
        add_common(cmd, c);
    }
    analyze->add_option("--series", c.series, "series.csv written by run")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : phc::kExitConfig;
    }

    try
    {
        if (sweep->parsed())
        {
            phc::SweepConfig s = phc::load_sweep_config(c.config);
            apply(s.base, c, false);
            if (c.jobs)
            {
                if (*c.jobs < 1)
                {
                    throw phc::ConfigError("--jobs", "must be at least 1");
                }
                s.parallel_jobs = *c.jobs;
            }
            return phc::cmd_sweep(s);
        }
        phc::RunConfig cfg = phc::load_run_config(c.config);
        apply(cfg, c, true);
        if (generate->parsed())
        {
            return phc::cmd_generate(cfg);
        }
        if (run->parsed())
        {
            return phc::cmd_run(cfg);
        }
        if (bands->parsed())
        {
            return phc::cmd_bands(cfg);
        }
        return phc::cmd_analyze(cfg, c.series);
    }
    catch (const phc::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return phc::kExitConfig;
    }
    catch (const phc::SetupError &e)
    {
        std::cerr << "setup error: " << e.what() << '\n';
        return phc::kExitConfig;
    }
    catch (const phc::GeometryError &e)
    {
        std::cerr << "geometry error: " << e.what() << '\n';
        return phc::kExitGeometry;
    }
    catch (const phc::SizingError &e)
    {
        std::cerr << "sizing error: " << e.what() << '\n';
        return phc::kExitGeometry;
    }
    catch (const phc::NumericsError &e)
    {
        std::cerr << "numerics error: " << e.what() << '\n';
        return phc::kExitNumerics;
    }
    catch (const phc::DivergenceError &e)
    {
        std::cerr << "numerics error: " << e.what() << '\n';
        return phc::kExitNumerics;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return phc::kExitFailure;
    }
}
