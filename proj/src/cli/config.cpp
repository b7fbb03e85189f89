#include "phc/cli.hpp"
#include "phc/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace phc
{
using nlohmann::json;

namespace
{
std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }

// Wraps one JSON object; remembers which keys were read so leftovers can be
// reported as unknown.
class Section
{
public:
    Section(const json &node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object())
        {
            throw ConfigError(path_, "expected an object");
        }
    }

    bool has(const std::string &key) const { return node_.contains(key); }
    std::string path(const std::string &key) const { return join(path_, key); }

    const json *get(const std::string &key)
    {
        seen_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    const json &require(const std::string &key)
    {
        const json *v = get(key);
        if (!v)
        {
            throw ConfigError(path(key), "required field is missing");
        }
        return *v;
    }

    double number(const std::string &key, double fallback, bool required = false)
    {
        const json *v = required ? &require(key) : get(key);
        if (!v)
        {
            return fallback;
        }
        if (!v->is_number())
        {
            throw ConfigError(path(key), "expected a number");
        }
        const double x = v->get<double>();
        if (!std::isfinite(x))
        {
            throw ConfigError(path(key), "must be finite");
        }
        return x;
    }

    double positive(const std::string &key, double fallback, bool required = false)
    {
        const double x = number(key, fallback, required);
        if (!(x > 0.0))
        {
            throw ConfigError(path(key), "must be positive");
        }
        return x;
    }

    int integer(const std::string &key, int fallback, int min_value)
    {
        const json *v = get(key);
        if (!v)
        {
            return fallback;
        }
        if (!v->is_number_integer())
        {
            throw ConfigError(path(key), "expected an integer");
        }
        const auto x = v->get<long long>();
        if (x < min_value || x > std::numeric_limits<int>::max())
        {
            throw ConfigError(path(key), "must be an integer >= " + std::to_string(min_value));
        }
        return static_cast<int>(x);
    }

    bool boolean(const std::string &key, bool fallback)
    {
        const json *v = get(key);
        if (!v)
        {
            return fallback;
        }
        if (!v->is_boolean())
        {
            throw ConfigError(path(key), "expected true or false");
        }
        return v->get<bool>();
    }

    std::string string(const std::string &key, const std::string &fallback)
    {
        const json *v = get(key);
        if (!v)
        {
            return fallback;
        }
        if (!v->is_string())
        {
            throw ConfigError(path(key), "expected a string");
        }
        return v->get<std::string>();
    }

    template <std::size_t N> std::array<double, N> numbers(const std::string &key, std::array<double, N> fallback)
    {
        const json *v = get(key);
        if (!v)
        {
            return fallback;
        }
        if (!v->is_array() || v->size() != N)
        {
            throw ConfigError(path(key), "expected an array of " + std::to_string(N) + " numbers");
        }
        std::array<double, N> out{};
        for (std::size_t i = 0; i < N; ++i)
        {
            if (!(*v)[i].is_number())
            {
                throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
            }
            out[i] = (*v)[i].get<double>();
        }
        return out;
    }

    std::optional<Section> child(const std::string &key)
    {
        const json *v = get(key);
        if (!v)
        {
            return std::nullopt;
        }
        return Section(*v, path(key));
    }

    // Call once every known key has been read.
    void finish() const
    {
        for (auto it = node_.begin(); it != node_.end(); ++it)
        {
            if (!seen_.count(it.key()))
            {
                throw ConfigError(path(it.key()), "unknown key");
            }
        }
    }

private:
    const json &node_;
    std::string path_;
    std::set<std::string> seen_;
};

Parity parse_parity(const std::string &path, const std::string &s)
{
    if (s == "none")
    {
        return Parity::kNone;
    }
    if (s == "even")
    {
        return Parity::kEven;
    }
    if (s == "odd")
    {
        return Parity::kOdd;
    }
    throw ConfigError(path, "expected \"none\", \"even\" or \"odd\", got \"" + s + "\"");
}

std::string parity_name(Parity p)
{
    switch (p)
    {
    case Parity::kEven:
        return "even";
    case Parity::kOdd:
        return "odd";
    default:
        return "none";
    }
}

Component parse_component_at(const std::string &path, const std::string &s)
{
    try
    {
        return parse_component(s);
    }
    catch (const std::exception &)
    {
        throw ConfigError(path, "unknown field component \"" + s + "\"");
    }
}

void parse_device(Section &s, DeviceSpec &device)
{
    auto lat = s.child("lattice");
    if (!lat)
    {
        throw ConfigError(s.path("lattice"), "required field is missing");
    }
    SlabLattice &l = device.lattice;
    const double r_over_a = l.r_nm / l.a_nm;
    l.a_nm = lat->positive("a", 0.0, true);
    l.r_nm = lat->number("r_over_a", r_over_a) * l.a_nm;
    l.thickness_nm = lat->positive("thickness", l.thickness_nm);
    l.n_slab = lat->positive("n", l.n_slab);
    l.nx = lat->integer("nx", l.nx, 1);
    l.ny = lat->integer("ny", l.ny, 1);
    l.padding_nm = lat->number("padding", l.padding_nm);
    lat->finish();
    device.target_wavelength_nm = s.positive("target_wavelength", device.target_wavelength_nm);

    device.defect = std::monostate{};
    if (auto d = s.child("defect"))
    {
        const std::string type = d->string("type", "none");
        if (type == "none")
        {
        }
        else if (type == "L3")
        {
            L3Params p;
            p.d1 = d->number("D1", p.d1);
            p.d2 = d->number("D2", p.d2);
            p.d3 = d->number("D3", p.d3);
            device.defect = p;
        }
        else if (type == "heterostructure")
        {
            HeterostructureParams p;
            p.width = d->positive("width", p.width);
            p.a1_ratio = d->positive("a1_ratio", p.a1_ratio);
            p.a2_ratio = d->positive("a2_ratio", p.a2_ratio);
            p.n_a1 = d->integer("n_a1", p.n_a1, 0);
            p.n_a2 = d->integer("n_a2", p.n_a2, 0);
            device.defect = p;
        }
        else
        {
            throw ConfigError(d->path("type"), "expected \"none\", \"L3\" or \"heterostructure\"");
        }
        d->finish();
    }
    s.finish();
}

RunConfig parse_config_body(const json &doc)
{
    RunConfig cfg;
    Section root(doc, "");
    auto device = root.child("device");
    if (!device)
    {
        throw ConfigError("device", "required field is missing");
    }
    CavityRunSettings &run = cfg.run;
    parse_device(*device, run.device);

    if (auto sim = root.child("simulation"))
    {
        run.resolution = sim->positive("resolution", run.resolution);
        run.steps = sim->integer("steps", run.steps, 0);
        run.courant = sim->positive("courant", run.courant);
        run.workers = sim->integer("workers", 1, 0);
        const double budget_mb = sim->positive("memory_budget_mb", static_cast<double>(run.memory_budget_bytes >> 20));
        run.memory_budget_bytes = static_cast<std::size_t>(budget_mb * 1048576.0);
        if (auto c = sim->child("cpml"))
        {
            run.cpml.thickness = c->integer("thickness", run.cpml.thickness, 0);
            run.cpml.m = c->number("order", run.cpml.m);
            const json *sm = c->get("sigma_max");
            if (sm && !sm->is_null())
            {
                run.cpml.sigma_max = c->positive("sigma_max", 0.0);
            }
            run.cpml.kappa_max = c->number("kappa_max", run.cpml.kappa_max);
            run.cpml.alpha_max = c->number("alpha_max", run.cpml.alpha_max);
            c->finish();
        }
        if (auto m = sim->child("symmetry"))
        {
            const char *axes[] = {"x", "y", "z"};
            for (int d = 0; d < 3; ++d)
            {
                run.symmetry.planes[d] =
                    parse_parity(m->path(axes[d]), m->string(axes[d], parity_name(run.symmetry.planes[d])));
            }
            m->finish();
        }
        sim->finish();
    }
    if (auto src = root.child("source"))
    {
        run.source_component =
            parse_component_at(src->path("component"), src->string("component", std::string(component_name(run.source_component))));
        run.source_offset_a = src->numbers<3>("offset_a", run.source_offset_a);
        run.source_bandwidth_nm = src->positive("bandwidth", run.source_bandwidth_nm);
        src->finish();
    }
    if (auto probe = root.child("probe"))
    {
        run.probe_component = parse_component_at(probe->path("component"),
                                                 probe->string("component", std::string(component_name(run.probe_component))));
        run.probe_offset_a = probe->numbers<3>("offset_a", run.probe_offset_a);
        probe->finish();
    }
    // Heterostructure runs default to a narrower window around the target.
    if (std::holds_alternative<HeterostructureParams>(run.device.defect))
    {
        run.band_fraction = {0.96, 1.04};
    }
    AnalysisSettings &an = cfg.analysis;
    if (auto a = root.child("analysis"))
    {
        run.band_fraction = a->numbers<2>("band", run.band_fraction);
        if (!(run.band_fraction[0] > 0.0) || !(run.band_fraction[1] > run.band_fraction[0]))
        {
            throw ConfigError(a->path("band"), "expected 0 < low < high");
        }
        an.gate_cutoffs = a->number("gate_cutoffs", an.gate_cutoffs);
        an.mode_volume = a->boolean("mode_volume", an.mode_volume);
        an.dft_fraction = a->positive("dft_fraction", an.dft_fraction);
        if (an.dft_fraction > 1.0)
        {
            throw ConfigError(a->path("dft_fraction"), "must not exceed 1");
        }
        an.dft_stride = a->integer("dft_stride", an.dft_stride, 1);
        const std::string w = a->string("window", window_name(an.window));
        try
        {
            an.window = parse_window(w);
        }
        catch (const std::exception &)
        {
            throw ConfigError(a->path("window"), "unknown window \"" + w + "\"");
        }
        an.padding = a->integer("padding", an.padding, 1);
        an.lorentzian = a->boolean("lorentzian", an.lorentzian);
        an.inversion.rank_tolerance = a->positive("rank_tolerance", an.inversion.rank_tolerance);
        an.inversion.min_q = a->number("min_q", an.inversion.min_q);
        an.inversion.min_relative_amplitude = a->number("min_relative_amplitude", an.inversion.min_relative_amplitude);
        a->finish();
    }
    run.gate_cutoffs = an.gate_cutoffs;
    run.mode_volume = an.mode_volume;
    run.dft_fraction = an.dft_fraction;
    run.dft_stride = an.dft_stride;

    if (auto o = root.child("output"))
    {
        cfg.output.directory = o->string("directory", cfg.output.directory);
        if (cfg.output.directory.empty())
        {
            throw ConfigError(o->path("directory"), "must not be empty");
        }
        if (const json *f = o->get("formats"))
        {
            if (!f->is_array())
            {
                throw ConfigError(o->path("formats"), "expected an array of strings");
            }
            cfg.output.csv = cfg.output.phcf = false;
            for (std::size_t i = 0; i < f->size(); ++i)
            {
                const json &v = (*f)[i];
                const std::string p = o->path("formats") + "[" + std::to_string(i) + "]";
                if (!v.is_string())
                {
                    throw ConfigError(p, "expected a string");
                }
                if (v == "csv")
                {
                    cfg.output.csv = true;
                }
                else if (v == "phcf")
                {
                    cfg.output.phcf = true;
                }
                else
                {
                    throw ConfigError(p, "expected \"csv\" or \"phcf\"");
                }
            }
        }
        cfg.output.decimation = o->integer("decimation", cfg.output.decimation, 1);
        o->finish();
    }
    if (auto b = root.child("bands"))
    {
        BandSettings &bs = cfg.bands;
        bs.n_waves = b->integer("n_waves", bs.n_waves, 1);
        bs.n_bands = b->integer("n_bands", bs.n_bands, 2);
        bs.samples_per_segment = b->integer("samples_per_segment", bs.samples_per_segment, 1);
        const std::string rule = b->string("rule", rule_name(bs.rule));
        if (rule == "inverse")
        {
            bs.rule = ExpansionRule::kInverse;
        }
        else if (rule == "direct")
        {
            bs.rule = ExpansionRule::kDirect;
        }
        else
        {
            throw ConfigError(b->path("rule"), "expected \"inverse\" or \"direct\"");
        }
        const json *bg = b->get("background_index");
        if (bg && !bg->is_null())
        {
            bs.background_index = b->positive("background_index", 0.0);
        }
        if (const json *g = b->get("gap_map_r_over_a"))
        {
            if (!g->is_array())
            {
                throw ConfigError(b->path("gap_map_r_over_a"), "expected an array of numbers");
            }
            for (std::size_t i = 0; i < g->size(); ++i)
            {
                if (!(*g)[i].is_number())
                {
                    throw ConfigError(b->path("gap_map_r_over_a") + "[" + std::to_string(i) + "]", "expected a number");
                }
                bs.gap_map_r_over_a.push_back((*g)[i].get<double>());
            }
        }
        b->finish();
    }
    const json *seed = root.get("seed");
    if (seed)
    {
        if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0))
        {
            throw ConfigError("seed", "expected a non-negative integer");
        }
        cfg.seed = seed->get<std::uint64_t>();
    }
    root.finish();

    // Geometry problems surface as GeometryError (exit 3), not config errors.
    run.device.validate();
    return cfg;
}

json parse_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("", "cannot read " + path);
    }
    try
    {
        return json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("", path + " is not valid JSON: " + e.what());
    }
}

// Manifests carry the resolved config under "config".
const json &unwrap_manifest(const json &doc)
{
    if (doc.is_object() && doc.contains("format") && doc["format"] == "phc-manifest")
    {
        if (!doc.contains("config"))
        {
            throw ConfigError("config", "manifest has no config section");
        }
        return doc["config"];
    }
    return doc;
}

} // namespace

RunConfig parse_run_config(const json &doc) { return parse_config_body(unwrap_manifest(doc)); }

RunConfig load_run_config(const std::string &path) { return parse_run_config(parse_file(path)); }

json to_json(const RunConfig &cfg)
{
    const CavityRunSettings &run = cfg.run;
    const SlabLattice &l = run.device.lattice;
    json j;
    j["device"]["lattice"] = {{"a", l.a_nm},        {"r_over_a", l.r_nm / l.a_nm},
                              {"thickness", l.thickness_nm}, {"n", l.n_slab},
                              {"nx", l.nx},         {"ny", l.ny},
                              {"padding", l.padding_nm}};
    j["device"]["target_wavelength"] = run.device.target_wavelength_nm;
    if (const auto *p = std::get_if<L3Params>(&run.device.defect))
    {
        j["device"]["defect"] = {{"type", "L3"}, {"D1", p->d1}, {"D2", p->d2}, {"D3", p->d3}};
    }
    else if (const auto *h = std::get_if<HeterostructureParams>(&run.device.defect))
    {
        j["device"]["defect"] = {{"type", "heterostructure"}, {"width", h->width}, {"a1_ratio", h->a1_ratio},
                                 {"a2_ratio", h->a2_ratio},    {"n_a1", h->n_a1},   {"n_a2", h->n_a2}};
    }
    else
    {
        j["device"]["defect"] = {{"type", "none"}};
    }
    json &sim = j["simulation"];
    sim["resolution"] = run.resolution;
    sim["steps"] = run.steps;
    sim["courant"] = run.courant;
    sim["workers"] = run.workers;
    sim["memory_budget_mb"] = static_cast<double>(run.memory_budget_bytes) / 1048576.0;
    sim["cpml"] = {{"thickness", run.cpml.thickness},
                   {"order", run.cpml.m},
                   {"sigma_max", run.cpml.sigma_max ? json(*run.cpml.sigma_max) : json(nullptr)},
                   {"kappa_max", run.cpml.kappa_max},
                   {"alpha_max", run.cpml.alpha_max}};
    sim["symmetry"] = {{"x", parity_name(run.symmetry.planes[0])},
                       {"y", parity_name(run.symmetry.planes[1])},
                       {"z", parity_name(run.symmetry.planes[2])}};
    j["source"] = {{"component", std::string(component_name(run.source_component))},
                   {"offset_a", run.source_offset_a},
                   {"bandwidth", run.source_bandwidth_nm}};
    j["probe"] = {{"component", std::string(component_name(run.probe_component))}, {"offset_a", run.probe_offset_a}};
    const AnalysisSettings &an = cfg.analysis;
    j["analysis"] = {{"band", run.band_fraction},
                     {"gate_cutoffs", an.gate_cutoffs},
                     {"mode_volume", an.mode_volume},
                     {"dft_fraction", an.dft_fraction},
                     {"dft_stride", an.dft_stride},
                     {"window", window_name(an.window)},
                     {"padding", an.padding},
                     {"lorentzian", an.lorentzian},
                     {"rank_tolerance", an.inversion.rank_tolerance},
                     {"min_q", an.inversion.min_q},
                     {"min_relative_amplitude", an.inversion.min_relative_amplitude}};
    json formats = json::array();
    if (cfg.output.csv)
    {
        formats.push_back("csv");
    }
    if (cfg.output.phcf)
    {
        formats.push_back("phcf");
    }
    j["output"] = {{"directory", cfg.output.directory}, {"formats", formats}, {"decimation", cfg.output.decimation}};
    j["bands"] = {{"n_waves", cfg.bands.n_waves},
                  {"n_bands", cfg.bands.n_bands},
                  {"samples_per_segment", cfg.bands.samples_per_segment},
                  {"rule", rule_name(cfg.bands.rule)},
                  {"background_index", cfg.bands.background_index ? json(*cfg.bands.background_index) : json(nullptr)},
                  {"gap_map_r_over_a", cfg.bands.gap_map_r_over_a}};
    j["seed"] = cfg.seed;
    return j;
}

RunConfig with_axis_value(const RunConfig &base, const std::string &axis, double value)
{
    json doc = to_json(base);
    json::json_pointer ptr;
    try
    {
        std::string p = "/" + axis;
        for (char &c : p)
        {
            if (c == '.')
            {
                c = '/';
            }
        }
        ptr = json::json_pointer(p);
    }
    catch (const json::exception &)
    {
        throw ConfigError("axis", "malformed parameter path \"" + axis + "\"");
    }
    if (!doc.contains(ptr) || !doc[ptr].is_number())
    {
        throw ConfigError("axis", "\"" + axis + "\" does not name a numeric field");
    }
    if (doc[ptr].is_number_integer())
    {
        if (value != std::floor(value))
        {
            throw ConfigError("values", "\"" + axis + "\" takes integer values");
        }
        doc[ptr] = static_cast<long long>(value);
    }
    else
    {
        doc[ptr] = value;
    }
    return parse_run_config(doc);
}

SweepConfig parse_sweep_config(const json &doc)
{
    SweepConfig sweep;
    Section root(doc, "");
    sweep.base = parse_run_config(root.require("base"));
    const json &axis = root.require("axis");
    if (!axis.is_string())
    {
        throw ConfigError("axis", "expected a string");
    }
    sweep.axis = axis.get<std::string>();
    const json &values = root.require("values");
    if (!values.is_array() || values.empty())
    {
        throw ConfigError("values", "expected a nonempty array of numbers");
    }
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (!values[i].is_number())
        {
            throw ConfigError("values[" + std::to_string(i) + "]", "expected a number");
        }
        sweep.values.push_back(values[i].get<double>());
    }
    sweep.parallel_jobs = root.integer("parallel_jobs", sweep.parallel_jobs, 1);
    root.finish();
    // Resolve the axis once up front so a typo fails before any run starts.
    // Bad geometry at a sweep point is that point's failure, not a config error.
    try
    {
        with_axis_value(sweep.base, sweep.axis, sweep.values.front());
    }
    catch (const GeometryError &)
    {
    }
    return sweep;
}

SweepConfig load_sweep_config(const std::string &path) { return parse_sweep_config(parse_file(path)); }

} // namespace phc
