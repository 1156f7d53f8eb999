#include "cflow/analysis.hpp"

#include "cflow/history_io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

namespace cflow {

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

MonitorSpec named(const std::string &name)
{
    MonitorSpec m;
    m.name = name;
    return m;
}

MonitorReport skipped(const std::string &name, const std::string &why)
{
    MonitorReport r;
    r.name = name;
    r.verdict = Verdict::Informational;
    r.detail = why;
    return r;
}

}  // namespace

std::vector<MonitorSpec> default_monitors(const RunConfig &cfg, const FlowHistory &h)
{
    std::vector<MonitorSpec> out;
    const bool interior = h.entries.size() >= 3;
    if (interior) out.push_back(named("area_decay"));
    for (const char *kind : {"cylindrical", "convexity"}) {
        MonitorSpec m = named("pinching_series");
        m.series = kind;
        m.m = cfg.flow.pinching_m;
        out.push_back(m);
    }
    if (cfg.flow.full_summaries)
        for (const char *kind : {"noncollapse_interior", "noncollapse_exterior"}) {
            MonitorSpec m = named("pinching_series");
            m.series = kind;
            out.push_back(m);
        }
    if (interior && cfg.seed) {
        MonitorSpec e = named("evolution");
        e.tolerance = 0.05;
        out.push_back(e);
        out.push_back(named("harnack"));
    }
    for (size_t i = 0; i < cfg.pinching.size(); ++i) {
        MonitorSpec l = named("lp_norm");
        l.context = int(i);
        out.push_back(l);
    }
    if (!h.entries.empty() && h.entries.back().surface->representation() == Representation::Mesh)
        out.push_back(named("gauss_integral"));
    return out;
}

double estimate_extinction_time(const FlowHistory &h)
{
    if (h.entries.empty()) throw DegenerateInput("empty history");
    const HistoryEntry &e = h.entries.back();
    const Surface &s = *e.surface;
    const SpeedFunction speed(h.config.speed, s.dim());
    const double vol = std::isfinite(e.summary.volume) ? e.summary.volume : s.global_geometry().volume;
    const double intF = s.integrate(speed_values(s, speed));
    return e.summary.t + 0.5 * (s.dim() + 1) * vol / intF;
}

MonitorReport run_monitor(const RunConfig &cfg, const FlowHistory &h, const MonitorSpec &m)
{
    const std::uint64_t seed = cfg.seed.value_or(0);
    if (m.name == "area_decay") {
        if (h.entries.size() < 3) return skipped("area_decay", "needs three snapshots");
        return area_decay_report(h, m.tolerance.value_or(0.02));
    }
    if (m.name == "evolution") {
        const EvolutionQuantity q = m.quantity == "F"           ? EvolutionQuantity::F
                                    : m.quantity == "inscribed" ? EvolutionQuantity::Inscribed
                                                                : EvolutionQuantity::Exscribed;
        return evolution_report(h, q, m.samples, m.tolerance.value_or(0.05), seed);
    }
    if (m.name == "pinching_series")
        return pinching_series(h, pinching_series_kind_from_string(m.series), m.m, m.slack, m.transient);
    if (m.name == "lp_norm") return lp_pinching_norm(h, make_context(cfg, m.context), m.tolerance.value_or(0.02));
    if (m.name == "poincare") {
        // u^2 = G_{sigma,+}^p on the first snapshot, r = sqrt(p).
        const PinchingContext ctx = make_context(cfg, m.context);
        const Surface &s = *h.entries.front().surface;
        Vector u(s.size());
        for (int i = 0; i < s.size(); ++i) {
            std::optional<double> up, low;
            if (ctx.kind == PinchingKind::Inscribed) up = s.inscribed_curvature(i);
            if (ctx.kind == PinchingKind::Exscribed) low = s.exscribed_curvature(i);
            u[i] = std::pow(g_sigma(ctx, s.point(i).kappa, up, low).positive_part, 0.5 * ctx.p);
        }
        try {
            return poincare_check(s, u, std::sqrt(double(ctx.p)), m.m, m.tolerance.value_or(1e-2));
        } catch (const DegenerateInput &e) {
            return skipped("poincare", std::string("support hypothesis not met: ") + e.what());
        }
    }
    if (m.name == "harnack") {
        if (h.entries.empty()) return skipped("harnack", "empty history");
        return harnack_report(h, m.t0.value_or(h.entries.front().summary.t), m.samples, seed);
    }
    if (m.name == "ancient") {
        AncientOptions opt;
        opt.extinction_time = m.extinction_time ? *m.extinction_time : estimate_extinction_time(h);
        opt.k = m.k;
        opt.p = m.p;
        return ancient_diagnostics(h, opt);
    }
    if (m.name == "gauss_integral") {
        const Surface &s = *h.entries.back().surface;
        if (s.representation() != Representation::Mesh) return skipped("gauss_integral", "meshes only");
        return gauss_integral(s, m.tolerance.value_or(0.01));
    }
    throw ConfigError("unknown monitor '" + m.name + "'");
}

std::vector<MonitorReport> run_monitors(const RunConfig &cfg, const FlowHistory &h)
{
    const std::vector<MonitorSpec> specs = cfg.monitors.empty() ? default_monitors(cfg, h) : cfg.monitors;
    std::vector<MonitorReport> out;
    for (const MonitorSpec &m : specs) out.push_back(run_monitor(cfg, h, m));
    return out;
}

MonitorReport certification_report(const CertificationReport &c)
{
    MonitorReport r;
    r.name = "certify_" + to_string(c.property);
    r.tolerance = c.tolerance;
    r.verdict = c.passed ? Verdict::Pass : Verdict::Fail;
    r.scalars = {{"samples", double(c.samples)}, {"worst_margin", c.worst_margin}};
    for (int i = 0; i < c.witness_kappa.size(); ++i) r.scalars["witness_kappa_" + std::to_string(i)] = c.witness_kappa[i];
    r.detail = "worst margin " + fmt(c.worst_margin);
    return r;
}

std::vector<MonitorReport> run_certification(const RunConfig &cfg)
{
    const int n = config_dim(cfg);
    SpeedFunction speed(cfg.flow.speed, n);
    const SymmetricCone cone = make_cone(cfg.flow.cone, speed);
    std::vector<MonitorReport> out;
    for (size_t i = 0; i < cfg.certify_properties.size(); ++i) {
        const SpeedProperty p = property_from_string(cfg.certify_properties[i]);
        MonitorReport r = certification_report(
            certify(speed, cone, p, cfg.certify_samples, derive_seed(cfg.seed.value(), i)));
        r.parameters = {{"speed", speed.name()}, {"cone", cone.describe()}};
        out.push_back(r);
    }
    return out;
}

MonitorReport probe_report(const RunConfig &cfg, const ProbeSpec &probe)
{
    const int n = config_dim(cfg);
    const std::uint64_t seed = cfg.seed.value();
    MonitorReport r;
    r.name = "probe_" + probe.form;
    r.parameters = {{"samples", std::to_string(probe.samples)}, {"seed", std::to_string(seed)}};
    QSignReport q;
    if (probe.form == "trace_norm_sign") {
        SpeedFunction speed(cfg.flow.speed, n);
        TraceNormFunction N(n, -1.0);
        q = sample_q_extremes(N, speed, SymmetricCone::positive(n), probe.samples, seed, "trace_norm_sign");
        r.tolerance = 1e-10;
        r.verdict = !speed.convex() ? Verdict::Informational
                    : q.min_normalized >= -r.tolerance ? Verdict::Pass
                                                      : Verdict::Fail;
        r.detail = "min normalized Q = " + fmt(q.min_normalized) + (speed.convex() ? "" : " (speed is not convex)");
    } else {
        const PinchingContext ctx = make_context(cfg, probe.context);
        r.parameters["context"] = std::to_string(probe.context);
        r.parameters["theta"] = fmt(ctx.theta);
        r.parameters["cone"] = ctx.cone->describe();
        if (probe.form == "g1_sign") {
            CylindricalG1 g(ctx.speed->impl(), ctx.c_m);
            q = sample_q_extremes(g, *ctx.speed, *ctx.cone, probe.samples, seed, "g1_sign");
            r.tolerance = 1e-10;
            r.verdict = !ctx.speed->concave() ? Verdict::Informational
                        : q.max_normalized <= r.tolerance ? Verdict::Pass
                                                          : Verdict::Fail;
            r.detail = "max normalized Q = " + fmt(q.max_normalized);
        } else if (probe.form == "g2_gamma") {
            auto g2f = g2_function(ctx);
            q = sample_q_extremes(*g2f, *ctx.speed, *ctx.cone, probe.samples, seed, "g2_gamma");
            r.verdict = Verdict::Informational;
            r.detail = "empirical gamma = " + fmt(q.empirical_gamma);
        } else {
            q = sample_lemma41(ctx, probe.sigma, probe.samples, seed);
            r.parameters["sigma"] = fmt(probe.sigma);
            const bool applies = ctx.speed->concave() && ctx.m == n - 1;
            r.verdict = !applies ? Verdict::Informational
                        : q.min_normalized > 0.0 ? Verdict::Pass
                                                 : Verdict::Fail;
            r.detail = "min combined form = " + fmt(q.min_normalized) +
                       (applies ? "" : " (needs a concave speed and m = n-1)");
        }
    }
    r.scalars = {{"samples", double(q.samples)},
                 {"min_normalized", q.min_normalized},
                 {"max_normalized", q.max_normalized},
                 {"empirical_gamma", q.empirical_gamma}};
    for (int i = 0; i < q.witness_min_kappa.size(); ++i)
        r.scalars["witness_min_kappa_" + std::to_string(i)] = q.witness_min_kappa[i];
    for (int i = 0; i < q.witness_max_kappa.size(); ++i)
        r.scalars["witness_max_kappa_" + std::to_string(i)] = q.witness_max_kappa[i];
    return r;
}

std::vector<MonitorReport> run_probes(const RunConfig &cfg)
{
    std::vector<MonitorReport> out;
    for (const ProbeSpec &p : cfg.probes) out.push_back(probe_report(cfg, p));
    return out;
}

void write_reports(const std::vector<MonitorReport> &reports, const std::string &dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "reports", ec);
    if (ec) throw IoError("cannot create directory '" + dir + "/reports': " + ec.message());
    std::vector<MonitorReport> named_reports = reports;
    std::map<std::string, int> used;
    for (MonitorReport &r : named_reports) {
        const int k = ++used[r.name];
        if (k > 1) r.name += "_" + std::to_string(k);
        write_text((fs::path(dir) / "reports" / (r.name + ".json")).string(), report_json(r));
    }
    write_text((fs::path(dir) / "monitors.csv").string(), combined_csv(named_reports));
}

bool any_failed(const std::vector<MonitorReport> &reports)
{
    for (const MonitorReport &r : reports)
        if (r.verdict == Verdict::Fail) return true;
    return false;
}

}  // namespace cflow
