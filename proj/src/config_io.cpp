#include "cflow/config_io.hpp"

#include "cflow/certify.hpp"
#include "cflow/monitors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cflow {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &msg)
{
    throw ConfigError(path + ": " + msg);
}

json number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

// Reads the fields of one JSON object and rejects keys nobody asked for.
class Reader {
public:
    Reader(const json &j, std::string path) : m_j(j), m_path(std::move(path))
    {
        if (!j.is_object()) fail(m_path, "expected an object");
    }

    std::string at(const std::string &key) const { return m_path + "." + key; }

    const json *find(const std::string &key)
    {
        m_seen.insert(key);
        auto it = m_j.find(key);
        return it == m_j.end() ? nullptr : &*it;
    }

    void get(const std::string &key, double &out)
    {
        if (const json *v = find(key)) out = as_double(*v, at(key));
    }
    void get(const std::string &key, int &out)
    {
        if (const json *v = find(key)) out = int(as_integer(*v, at(key)));
    }
    void get(const std::string &key, long &out)
    {
        if (const json *v = find(key)) out = long(as_integer(*v, at(key)));
    }
    void get(const std::string &key, bool &out)
    {
        if (const json *v = find(key)) {
            if (!v->is_boolean()) fail(at(key), "expected a boolean");
            out = v->get<bool>();
        }
    }
    void get(const std::string &key, std::string &out)
    {
        if (const json *v = find(key)) {
            if (!v->is_string()) fail(at(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    void get(const std::string &key, std::optional<double> &out)
    {
        if (const json *v = find(key)) {
            if (v->is_null()) out.reset();
            else out = as_double(*v, at(key));
        }
    }
    void get(const std::string &key, std::vector<double> &out)
    {
        if (const json *v = find(key)) {
            if (!v->is_array()) fail(at(key), "expected an array of numbers");
            out.clear();
            for (size_t i = 0; i < v->size(); ++i) out.push_back(as_double((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
        }
    }
    void get(const std::string &key, std::vector<std::string> &out)
    {
        if (const json *v = find(key)) {
            if (!v->is_array()) fail(at(key), "expected an array of strings");
            out.clear();
            for (size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_string()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a string");
                out.push_back((*v)[i].get<std::string>());
            }
        }
    }

    void finish() const
    {
        for (auto it = m_j.begin(); it != m_j.end(); ++it)
            if (!m_seen.count(it.key())) fail(at(it.key()), "unknown field");
    }

    static double as_double(const json &v, const std::string &path)
    {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "inf") return std::numeric_limits<double>::infinity();
            if (s == "-inf") return -std::numeric_limits<double>::infinity();
            if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        }
        fail(path, "expected a number");
    }

    static long long as_integer(const json &v, const std::string &path)
    {
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
        }
        fail(path, "expected an integer");
    }

private:
    const json &m_j;
    std::string m_path;
    std::set<std::string> m_seen;
};

template <class T, class F>
void get_list(Reader &r, const std::string &key, std::vector<T> &out, F read_one)
{
    if (const json *v = r.find(key)) {
        if (!v->is_array()) fail(r.at(key), "expected an array");
        out.clear();
        for (size_t i = 0; i < v->size(); ++i) out.push_back(read_one((*v)[i], r.at(key) + "[" + std::to_string(i) + "]"));
    }
}

template <class F>
void get_object(Reader &r, const std::string &key, F read)
{
    if (const json *v = r.find(key)) read(*v, r.at(key));
}

SpeedSpec read_speed(const json &j, const std::string &path)
{
    SpeedSpec s;
    if (j.is_string()) {
        s.family = j.get<std::string>();
        return s;
    }
    Reader r(j, path);
    r.get("family", s.family);
    r.get("r", s.r);
    r.get("k", s.k);
    r.get("l", s.l);
    r.get("weights", s.weights);
    get_list(r, "terms", s.terms, read_speed);
    r.finish();
    return s;
}

json emit_speed(const SpeedSpec &s)
{
    json j;
    j["family"] = s.family;
    j["r"] = number(s.r);
    j["k"] = s.k;
    j["l"] = s.l;
    json w = json::array();
    for (double v : s.weights) w.push_back(number(v));
    j["weights"] = w;
    json t = json::array();
    for (auto &term : s.terms) t.push_back(emit_speed(term));
    j["terms"] = t;
    return j;
}

ConeSpec read_cone(const json &j, const std::string &path)
{
    ConeSpec c;
    Reader r(j, path);
    r.get("type", c.type);
    r.get("m", c.m);
    r.get("margin", c.margin);
    r.finish();
    return c;
}

json emit_cone(const ConeSpec &c)
{
    json j;
    j["type"] = c.type;
    j["m"] = c.m;
    j["margin"] = number(c.margin);
    return j;
}

ShapeSpec read_shape(const json &j, const std::string &path)
{
    ShapeSpec s;
    Reader r(j, path);
    r.get("kind", s.kind);
    r.get("representation", s.representation);
    r.get("n", s.n);
    r.get("resolution", s.resolution);
    r.get("radius", s.radius);
    r.get("axes", s.axes);
    r.get("length", s.length);
    r.get("neck_depth", s.neck_depth);
    r.get("neck_width", s.neck_width);
    r.get("tube", s.tube);
    r.get("path", s.path);
    r.get("genus", s.genus);
    get_object(r, "profile_policy", [&](const json &v, const std::string &p) {
        Reader q(v, p);
        q.get("min_ratio", s.profile_policy.min_ratio);
        q.get("max_ratio", s.profile_policy.max_ratio);
        q.get("curvature_weight", s.profile_policy.curvature_weight);
        q.finish();
    });
    get_object(r, "mesh_policy", [&](const json &v, const std::string &p) {
        Reader q(v, p);
        q.get("min_ratio", s.mesh_policy.min_ratio);
        q.get("max_ratio", s.mesh_policy.max_ratio);
        q.get("min_quality", s.mesh_policy.min_quality);
        q.get("fit_order", s.mesh_policy.fit_order);
        q.finish();
    });
    r.finish();
    return s;
}

json emit_shape(const ShapeSpec &s)
{
    json j;
    j["kind"] = s.kind;
    j["representation"] = s.representation;
    j["n"] = s.n;
    j["resolution"] = s.resolution;
    j["radius"] = number(s.radius);
    json axes = json::array();
    for (double a : s.axes) axes.push_back(number(a));
    j["axes"] = axes;
    j["length"] = number(s.length);
    j["neck_depth"] = number(s.neck_depth);
    j["neck_width"] = number(s.neck_width);
    j["tube"] = number(s.tube);
    j["path"] = s.path;
    j["genus"] = s.genus;
    j["profile_policy"] = {{"min_ratio", number(s.profile_policy.min_ratio)},
                           {"max_ratio", number(s.profile_policy.max_ratio)},
                           {"curvature_weight", number(s.profile_policy.curvature_weight)}};
    j["mesh_policy"] = {{"min_ratio", number(s.mesh_policy.min_ratio)},
                        {"max_ratio", number(s.mesh_policy.max_ratio)},
                        {"min_quality", number(s.mesh_policy.min_quality)},
                        {"fit_order", s.mesh_policy.fit_order}};
    return j;
}

void read_flow_params(const json &j, const std::string &path, FlowConfig &f)
{
    Reader r(j, path);
    r.get("c_cfl", f.c_cfl);
    r.get("max_time", f.max_time);
    r.get("max_steps", f.max_steps);
    r.get("blowup_factor", f.blowup_factor);
    r.get("resolution_factor", f.resolution_factor);
    r.get("snapshot_every", f.snapshot_every);
    r.get("remesh", f.remesh);
    r.get("pinching_m", f.pinching_m);
    r.get("full_summaries", f.full_summaries);
    r.finish();
}

json emit_flow_params(const FlowConfig &f)
{
    json j;
    j["c_cfl"] = number(f.c_cfl);
    j["max_time"] = number(f.max_time);
    j["max_steps"] = f.max_steps;
    j["blowup_factor"] = number(f.blowup_factor);
    j["resolution_factor"] = number(f.resolution_factor);
    j["snapshot_every"] = f.snapshot_every;
    j["remesh"] = f.remesh;
    j["pinching_m"] = f.pinching_m;
    j["full_summaries"] = f.full_summaries;
    return j;
}

PinchingSpec read_pinching(const json &j, const std::string &path)
{
    PinchingSpec p;
    Reader r(j, path);
    r.get("kind", p.kind);
    r.get("m", p.m);
    r.get("epsilon", p.epsilon);
    r.get("sigma", p.sigma);
    r.get("p", p.p);
    r.get("K", p.K);
    r.get("theta", p.theta);
    get_object(r, "cone", [&](const json &v, const std::string &q) { p.cone = read_cone(v, q); });
    r.finish();
    return p;
}

json emit_pinching(const PinchingSpec &p)
{
    json j;
    j["kind"] = p.kind;
    j["m"] = p.m;
    j["epsilon"] = number(p.epsilon);
    j["sigma"] = number(p.sigma);
    j["p"] = p.p;
    j["K"] = number(p.K);
    j["theta"] = p.theta ? number(*p.theta) : json(nullptr);
    j["cone"] = emit_cone(p.cone);
    return j;
}

MonitorSpec read_monitor(const json &j, const std::string &path)
{
    MonitorSpec m;
    if (j.is_string()) {
        m.name = j.get<std::string>();
        return m;
    }
    Reader r(j, path);
    r.get("name", m.name);
    r.get("tolerance", m.tolerance);
    r.get("quantity", m.quantity);
    r.get("series", m.series);
    r.get("m", m.m);
    r.get("slack", m.slack);
    r.get("transient", m.transient);
    r.get("samples", m.samples);
    r.get("t0", m.t0);
    r.get("extinction_time", m.extinction_time);
    r.get("k", m.k);
    r.get("p", m.p);
    r.get("context", m.context);
    r.finish();
    return m;
}

json emit_monitor(const MonitorSpec &m)
{
    json j;
    j["name"] = m.name;
    j["tolerance"] = m.tolerance ? number(*m.tolerance) : json(nullptr);
    j["quantity"] = m.quantity;
    j["series"] = m.series;
    j["m"] = m.m;
    j["slack"] = number(m.slack);
    j["transient"] = m.transient ? number(*m.transient) : json(nullptr);
    j["samples"] = m.samples;
    j["t0"] = m.t0 ? number(*m.t0) : json(nullptr);
    j["extinction_time"] = m.extinction_time ? number(*m.extinction_time) : json(nullptr);
    j["k"] = m.k;
    j["p"] = number(m.p);
    j["context"] = m.context;
    return j;
}

ProbeSpec read_probe(const json &j, const std::string &path)
{
    ProbeSpec p;
    Reader r(j, path);
    r.get("form", p.form);
    r.get("context", p.context);
    r.get("samples", p.samples);
    r.get("sigma", p.sigma);
    r.finish();
    return p;
}

json emit_probe(const ProbeSpec &p)
{
    return {{"form", p.form}, {"context", p.context}, {"samples", p.samples}, {"sigma", number(p.sigma)}};
}

bool one_of(const std::string &v, std::initializer_list<const char *> options)
{
    return std::any_of(options.begin(), options.end(), [&](const char *o) { return v == o; });
}

std::string list(std::initializer_list<const char *> options)
{
    std::string s;
    for (const char *o : options) s += (s.empty() ? "" : ", ") + std::string(o);
    return s;
}

void check_m(int m, int n, const std::string &path)
{
    if (m < 0 || m > n - 1) fail(path, "m must satisfy 0 ≤ m ≤ n−1");
}

void validate_cone(const ConeSpec &c, int n, const std::string &path)
{
    const auto types = {"speed", "positive", "m_convex", "half_space"};
    if (!one_of(c.type, types)) fail(path + ".type", "unknown cone type '" + c.type + "'; available: " + list(types));
    check_m(c.m, n, path + ".m");
    if (!(c.margin >= 0.0)) fail(path + ".margin", "margin must be non-negative");
}

}  // namespace

int config_dim(const RunConfig &cfg)
{
    return cfg.flow.shape.n;
}

void validate(const RunConfig &cfg)
{
    const auto commands = {"simulate", "certify-speed", "probe-q", "analyze"};
    if (!one_of(cfg.command, commands))
        fail("config.command", "unknown command '" + cfg.command + "'; available: " + list(commands));

    const ShapeSpec &s = cfg.flow.shape;
    const auto shapes = shape_catalog();
    if (std::find(shapes.begin(), shapes.end(), s.kind) == shapes.end()) {
        std::string avail;
        for (auto &k : shapes) avail += (avail.empty() ? "" : ", ") + k;
        fail("config.shape.kind", "unknown shape '" + s.kind + "'; available: " + avail);
    }
    if (!one_of(s.representation, {"profile", "mesh"}))
        fail("config.shape.representation", "representation must be profile or mesh");
    if (s.n < 2) fail("config.shape.n", "dimension n must be >= 2");
    if (s.representation == "mesh" && s.n != 2) fail("config.shape.n", "meshes are surfaces in R^3 (n = 2)");
    if (s.resolution < 1) fail("config.shape.resolution", "resolution must be positive");
    const int n = s.n;

    try {
        SpeedFunction speed(cfg.flow.speed, n);
    } catch (const Error &e) {
        fail("config.speed", e.what());
    }
    validate_cone(cfg.flow.cone, n, "config.cone");

    const FlowConfig &f = cfg.flow;
    if (!(f.c_cfl > 0.0 && f.c_cfl < 1.0)) fail("config.flow.c_cfl", "c_cfl must lie in (0, 1)");
    if (!(f.max_time > 0.0)) fail("config.flow.max_time", "max_time must be positive");
    if (f.max_steps < 1) fail("config.flow.max_steps", "max_steps must be positive");
    if (!(f.blowup_factor > 0.0)) fail("config.flow.blowup_factor", "blowup_factor must be positive");
    if (!(f.resolution_factor >= 0.0)) fail("config.flow.resolution_factor", "resolution_factor must be non-negative");
    if (f.snapshot_every < 1) fail("config.flow.snapshot_every", "snapshot_every must be positive");
    check_m(f.pinching_m, n, "config.flow.pinching_m");

    for (size_t i = 0; i < cfg.pinching.size(); ++i) {
        const PinchingSpec &p = cfg.pinching[i];
        const std::string path = "config.pinching[" + std::to_string(i) + "]";
        if (!one_of(p.kind, {"cylindrical", "inscribed", "exscribed"}))
            fail(path + ".kind", "unknown pinching kind '" + p.kind + "'; available: cylindrical, inscribed, exscribed");
        check_m(p.m, n, path + ".m");
        if (!(p.sigma > 0.0 && p.sigma < 0.5)) fail(path + ".sigma", "sigma must lie in (0, 0.5)");
        if (p.p < 2) fail(path + ".p", "p must be >= 2");
        if (!(p.epsilon >= 0.0)) fail(path + ".epsilon", "epsilon must be non-negative");
        if (!(p.K >= 0.0)) fail(path + ".K", "K must be non-negative");
        if (p.theta && !(*p.theta > 0.0)) fail(path + ".theta", "theta must be positive");
        validate_cone(p.cone, n, path + ".cone");
    }

    const auto monitors = {"area_decay", "evolution", "pinching_series", "lp_norm",
                               "poincare", "harnack", "ancient", "gauss_integral"};
    bool stochastic = cfg.command == "certify-speed" || cfg.command == "probe-q";
    for (size_t i = 0; i < cfg.monitors.size(); ++i) {
        const MonitorSpec &m = cfg.monitors[i];
        const std::string path = "config.monitors[" + std::to_string(i) + "]";
        if (!one_of(m.name, monitors))
            fail(path + ".name", "unknown monitor '" + m.name + "'; available: " + list(monitors));
        if (!one_of(m.quantity, {"F", "inscribed", "exscribed"}))
            fail(path + ".quantity", "quantity must be F, inscribed or exscribed");
        try {
            pinching_series_kind_from_string(m.series);
        } catch (const ConfigError &e) {
            fail(path + ".series", e.what());
        }
        check_m(m.m, n, path + ".m");
        if (!(m.slack >= 0.0)) fail(path + ".slack", "slack must be non-negative");
        if (m.transient && !(*m.transient >= 0.0 && *m.transient <= 1.0))
            fail(path + ".transient", "transient must lie in [0, 1]");
        if (m.samples < 1) fail(path + ".samples", "samples must be positive");
        if (m.k < 1) fail(path + ".k", "k must be positive");
        if ((m.name == "lp_norm" || m.name == "poincare") && (m.context < 0 || m.context >= int(cfg.pinching.size())))
            fail(path + ".context", "no pinching context with index " + std::to_string(m.context));
        if (m.name == "evolution" || m.name == "harnack") stochastic = true;
    }

    if (cfg.command == "certify-speed") {
        for (size_t i = 0; i < cfg.certify_properties.size(); ++i) {
            try {
                property_from_string(cfg.certify_properties[i]);
            } catch (const Error &e) {
                fail("config.certify.properties[" + std::to_string(i) + "]", e.what());
            }
        }
        if (cfg.certify_samples < 1) fail("config.certify.samples", "samples must be positive");
    }
    for (size_t i = 0; i < cfg.probes.size(); ++i) {
        const ProbeSpec &p = cfg.probes[i];
        const std::string path = "config.probes[" + std::to_string(i) + "]";
        const auto forms = {"g1_sign", "g2_gamma", "gradient_combined", "trace_norm_sign"};
        if (!one_of(p.form, forms)) fail(path + ".form", "unknown form '" + p.form + "'; available: " + list(forms));
        if (p.form != "trace_norm_sign" && (p.context < 0 || p.context >= int(cfg.pinching.size())))
            fail(path + ".context", "no pinching context with index " + std::to_string(p.context));
        if (p.samples < 1) fail(path + ".samples", "samples must be positive");
        if (!(p.sigma > 0.0)) fail(path + ".sigma", "sigma must be positive");
    }
    if (cfg.command == "probe-q" && cfg.probes.empty()) fail("config.probes", "probe-q needs at least one probe");
    if (stochastic && !cfg.seed) fail("config.seed", "a seed is required for sampled checks");
}

RunConfig parse_config(const std::string &text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    Reader r(j, "config");
    r.get("command", cfg.command);
    get_object(r, "speed", [&](const json &v, const std::string &p) { cfg.flow.speed = read_speed(v, p); });
    get_object(r, "cone", [&](const json &v, const std::string &p) { cfg.flow.cone = read_cone(v, p); });
    get_object(r, "shape", [&](const json &v, const std::string &p) { cfg.flow.shape = read_shape(v, p); });
    get_object(r, "flow", [&](const json &v, const std::string &p) { read_flow_params(v, p, cfg.flow); });
    get_list(r, "pinching", cfg.pinching, read_pinching);
    get_list(r, "monitors", cfg.monitors, read_monitor);
    get_object(r, "certify", [&](const json &v, const std::string &p) {
        Reader q(v, p);
        q.get("properties", cfg.certify_properties);
        q.get("samples", cfg.certify_samples);
        q.finish();
    });
    get_list(r, "probes", cfg.probes, read_probe);
    r.get("output", cfg.output);
    if (const json *s = r.find("seed")) {
        if (!s->is_null()) {
            if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
                fail("config.seed", "expected a non-negative integer");
            cfg.seed = s->get<std::uint64_t>();
        }
    }
    r.finish();
    validate(cfg);
    return cfg;
}

std::string emit_config(const RunConfig &cfg)
{
    json j;
    j["command"] = cfg.command;
    j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    j["output"] = cfg.output;
    j["speed"] = emit_speed(cfg.flow.speed);
    j["cone"] = emit_cone(cfg.flow.cone);
    j["shape"] = emit_shape(cfg.flow.shape);
    j["flow"] = emit_flow_params(cfg.flow);
    json pin = json::array();
    for (auto &p : cfg.pinching) pin.push_back(emit_pinching(p));
    j["pinching"] = pin;
    json mon = json::array();
    for (auto &m : cfg.monitors) mon.push_back(emit_monitor(m));
    j["monitors"] = mon;
    j["certify"] = {{"properties", cfg.certify_properties}, {"samples", cfg.certify_samples}};
    json pr = json::array();
    for (auto &p : cfg.probes) pr.push_back(emit_probe(p));
    j["probes"] = pr;
    return j.dump(2) + "\n";
}

PinchingContext make_context(const RunConfig &cfg, int index)
{
    if (index < 0 || index >= int(cfg.pinching.size()))
        throw ConfigError("config.pinching: no context with index " + std::to_string(index));
    const PinchingSpec &p = cfg.pinching[index];
    const int n = config_dim(cfg);
    SpeedFunction speed(cfg.flow.speed, n);
    const SymmetricCone cone = make_cone(p.cone, speed);
    return make_pinching_context(speed, pinching_kind_from_string(p.kind), p.m, cone, p.epsilon, p.sigma, p.p, p.K,
                                 {}, p.theta);
}

std::string read_text(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace cflow
