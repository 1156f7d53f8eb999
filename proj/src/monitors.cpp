#include "cflow/monitors.hpp"

#include "cflow/certify.hpp"
#include "cflow/tri_mesh.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace cflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_entries(const FlowHistory &h, size_t count, const std::string &what)
{
    if (h.entries.size() < count)
        throw DegenerateInput(what + " needs at least " + std::to_string(count) + " snapshots, history has " +
                              std::to_string(h.entries.size()));
}

void require_interior(const FlowHistory &h, int i)
{
    if (i <= 0 || i + 1 >= int(h.entries.size()))
        throw DegenerateInput("snapshot " + std::to_string(i) + " is an endpoint; central differences need neighbors");
}

SpeedFunction history_speed(const FlowHistory &h)
{
    require_entries(h, 1, "speed lookup");
    return SpeedFunction(h.config.speed, h.entries[0].surface->dim());
}

const Surface &surf(const FlowHistory &h, int i) { return *h.entries[i].surface; }

double sum_fdot_kappa2(const SpeedFunction &speed, const PointGeometry &p)
{
    return weighted_norm_A(speed, p);
}

// Per-snapshot node fields, computed once per call.
class FieldCache {
public:
    FieldCache(const FlowHistory &h, const SpeedFunction &speed) : m_h(h), m_speed(speed) {}

    const Vector &F(int i) { return get(m_F, i, [&](const Surface &s) { return speed_values(s, m_speed); }); }
    const Vector &kbar(int i)
    {
        return get(m_kbar, i, [](const Surface &s) {
            Vector v(s.size());
            for (int k = 0; k < s.size(); ++k) v[k] = s.inscribed_curvature(k);
            return v;
        });
    }
    const Vector &kunder(int i)
    {
        return get(m_kunder, i, [](const Surface &s) {
            Vector v(s.size());
            for (int k = 0; k < s.size(); ++k) v[k] = s.exscribed_curvature(k);
            return v;
        });
    }
    const Vector &field(EvolutionQuantity q, int i)
    {
        switch (q) {
            case EvolutionQuantity::F: return F(i);
            case EvolutionQuantity::Inscribed: return kbar(i);
            case EvolutionQuantity::Exscribed: return kunder(i);
        }
        throw ConfigError("unknown evolution quantity");
    }

private:
    template <class Make>
    const Vector &get(std::map<int, Vector> &store, int i, Make make)
    {
        auto it = store.find(i);
        if (it == store.end()) it = store.emplace(i, make(surf(m_h, i))).first;
        return it->second;
    }

    const FlowHistory &m_h;
    const SpeedFunction &m_speed;
    std::map<int, Vector> m_F, m_kbar, m_kunder;
};

double central_difference(const FlowHistory &h, int i, double a, double b, double c)
{
    const double t0 = h.entries[i - 1].summary.t, t1 = h.entries[i].summary.t, t2 = h.entries[i + 1].summary.t;
    const double h1 = t1 - t0, h2 = t2 - t1;
    if (!(h1 > 0.0 && h2 > 0.0)) throw DegenerateInput("snapshot times are not strictly increasing");
    return -h2 / (h1 * (h1 + h2)) * a + (h2 - h1) / (h1 * h2) * b + h1 / (h2 * (h1 + h2)) * c;
}

EvolutionResidual evolution_residual_impl(const FlowHistory &h, const SpeedFunction &speed, FieldCache &cache,
                                          EvolutionQuantity q, int index, int i, double margin)
{
    require_interior(h, i);
    const Surface &s = surf(h, i);
    const PointGeometry &p = s.point(index);
    const Vector &u = cache.field(q, i);
    const double val = u[index];

    EvolutionResidual r;
    const double scale_kappa = p.norm_A;
    if (q == EvolutionQuantity::Inscribed) r.in_domain = val > p.kappa.max() + margin * scale_kappa;
    if (q == EvolutionQuantity::Exscribed) r.in_domain = val < p.kappa.min() - margin * scale_kappa;

    const int prev = track(h, i, index, i - 1), next = track(h, i, index, i + 1);
    const double dt_u = central_difference(h, i, cache.field(q, i - 1)[prev], val, cache.field(q, i + 1)[next]);
    FieldDerivatives d = s.field_derivatives(u, index);
    const Vector fdot = speed.gradient(p.principal);
    const double normA_F = sum_fdot_kappa2(speed, p);

    r.lhs = dt_u - fdot.dot(d.hessian.diagonal());
    r.scale = normA_F * std::abs(val);
    switch (q) {
        case EvolutionQuantity::F:
            r.rhs = normA_F * val;
            r.residual = r.lhs - r.rhs;
            break;
        case EvolutionQuantity::Inscribed: {
            double grad = 0.0;
            for (int k = 0; k < s.dim(); ++k) grad += fdot[k] * d.gradient[k] * d.gradient[k] / (val - p.principal[k]);
            r.rhs = normA_F * val - 2.0 * grad;
            r.residual = r.rhs - r.lhs;
            break;
        }
        case EvolutionQuantity::Exscribed: {
            double grad = 0.0;
            for (int k = 0; k < s.dim(); ++k) grad += fdot[k] * d.gradient[k] * d.gradient[k] / (p.principal[k] - val);
            r.rhs = normA_F * val + 2.0 * grad;
            r.residual = r.lhs - r.rhs;
            break;
        }
    }
    return r;
}

std::string quantity_name(EvolutionQuantity q)
{
    switch (q) {
        case EvolutionQuantity::F: return "F";
        case EvolutionQuantity::Inscribed: return "inscribed";
        case EvolutionQuantity::Exscribed: return "exscribed";
    }
    return "?";
}

std::vector<int> sample_nodes(int size, int samples, std::uint64_t seed, int snapshot)
{
    std::vector<int> nodes;
    if (samples >= size) {
        for (int k = 0; k < size; ++k) nodes.push_back(k);
        return nodes;
    }
    std::mt19937_64 rng = indexed_rng(seed, snapshot);
    std::uniform_int_distribution<int> pick(0, size - 1);
    std::set<int> chosen;
    while (int(chosen.size()) < samples) chosen.insert(pick(rng));
    return {chosen.begin(), chosen.end()};
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool is_max_kind(PinchingSeriesKind k)
{
    return k == PinchingSeriesKind::Cylindrical || k == PinchingSeriesKind::Inscribed ||
           k == PinchingSeriesKind::NoncollapseInterior || k == PinchingSeriesKind::CylDistanceAtMax;
}

bool convex_snapshot(const Surface &s)
{
    for (int i = 0; i < s.size(); ++i)
        if (!(s.point(i).kappa.min() > 0.0)) return false;
    return true;
}

bool inverse_concave(const SpeedFunction &speed)
{
    const SymmetricCone pos = SymmetricCone::positive(speed.dim());
    return certify(speed, pos, SpeedProperty::InverseConcave, 400, 97).passed;
}

// Stored summary value, when it was computed with the same m.
std::optional<double> summary_ratio(const FlowHistory &h, int i, PinchingSeriesKind kind, int m)
{
    const SnapshotSummary &s = h.entries[i].summary;
    const bool same_m = m == h.config.pinching_m;
    double v = kNaN;
    switch (kind) {
        case PinchingSeriesKind::Cylindrical: if (same_m) v = s.max_cyl_ratio; break;
        case PinchingSeriesKind::Convexity: v = s.min_convexity_ratio; break;
        case PinchingSeriesKind::Inscribed: if (same_m) v = s.max_insc_pinching; break;
        case PinchingSeriesKind::Exscribed:
        case PinchingSeriesKind::NoncollapseExterior: v = s.min_exsc_ratio; break;
        case PinchingSeriesKind::NoncollapseInterior: v = s.max_insc_ratio; break;
        case PinchingSeriesKind::CylDistanceAtMax:
            if (m >= 0 && m < int(s.cyl_distance_at_max.size())) v = s.cyl_distance_at_max[m];
            break;
    }
    if (std::isfinite(v)) return v;
    return std::nullopt;
}

// log sum_i exp(a_i) over finite entries; -inf if none.
double log_sum_exp(const std::vector<double> &a)
{
    double mx = -kInf;
    for (double v : a) mx = std::max(mx, v);
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (double v : a) s += std::exp(v - mx);
    return mx + std::log(s);
}

double log_add(double a, double b)
{
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    double mx = std::max(a, b);
    return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

// Integral over [x0, x1] of the curve through (x0, y0), (x1, y1) that is a
// power law when both ordinates are positive, a line otherwise.
double power_segment_integral(double x0, double y0, double x1, double y1)
{
    if (x0 > 0.0 && x1 > 0.0 && y0 > 0.0 && y1 > 0.0 && x0 != x1) {
        const double b = std::log(y1 / y0) / std::log(x1 / x0);
        if (std::abs(b + 1.0) < 1e-12) return y0 * x0 * std::log(x1 / x0);
        return y0 / std::pow(x0, b) * (std::pow(x1, b + 1.0) - std::pow(x0, b + 1.0)) / (b + 1.0);
    }
    return 0.5 * (y0 + y1) * (x1 - x0);
}

GlobalGeometry snapshot_geometry(const FlowHistory &h, int i)
{
    const SnapshotSummary &s = h.entries[i].summary;
    if (std::isfinite(s.volume) && std::isfinite(s.inradius) && std::isfinite(s.circumradius) &&
        std::isfinite(s.diameter))
        return {s.area, s.volume, s.inradius, s.circumradius, s.diameter};
    return surf(h, i).global_geometry();
}

nlohmann::ordered_json number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

std::string to_string(Verdict v)
{
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Informational: return "informational";
    }
    return "?";
}

int track(const FlowHistory &h, int from, int index, int to)
{
    const HistoryEntry &a = h.entries.at(from), &b = h.entries.at(to);
    if (a.summary.remeshes == b.summary.remeshes && a.surface->size() == b.surface->size()) return index;
    return b.surface->nearest(a.surface->point(index).position);
}

double time_derivative(const FlowHistory &h, int i, int index, const std::function<double(int, int)> &value)
{
    require_interior(h, i);
    return central_difference(h, i, value(i - 1, track(h, i, index, i - 1)), value(i, index),
                              value(i + 1, track(h, i, index, i + 1)));
}

////////////////////////////////////////////////////////////////////////////////
// area decay
////////////////////////////////////////////////////////////////////////////////
namespace {

double total_area(const Surface &s)
{
    double a = 0.0;
    for (int k = 0; k < s.size(); ++k) a += s.weight(k);
    return a;
}

double integral_FH(const Surface &s, const SpeedFunction &speed)
{
    Vector F = speed_values(s, speed);
    double v = 0.0;
    for (int k = 0; k < s.size(); ++k) v += F[k] * s.point(k).H * s.weight(k);
    return v;
}

}  // namespace

double area_decay_residual(const FlowHistory &h, int i)
{
    require_interior(h, i);
    const SpeedFunction speed = history_speed(h);
    const double dmu = central_difference(h, i, total_area(surf(h, i - 1)), total_area(surf(h, i)),
                                          total_area(surf(h, i + 1)));
    const double fh = integral_FH(surf(h, i), speed);
    return std::abs(dmu + fh) / fh;
}

MonitorReport area_decay_report(const FlowHistory &h, double tolerance)
{
    require_entries(h, 3, "area decay");
    MonitorReport r;
    r.name = "area_decay";
    r.tolerance = tolerance;
    std::vector<double> res;
    for (int i = 1; i + 1 < int(h.entries.size()); ++i) {
        r.times.push_back(h.entries[i].summary.t);
        r.snapshots.push_back(i);
        res.push_back(area_decay_residual(h, i));
    }
    const double worst = *std::max_element(res.begin(), res.end());
    r.series["residual"] = res;
    r.scalars["max_residual"] = worst;
    r.verdict = worst <= tolerance ? Verdict::Pass : Verdict::Fail;
    r.detail = "max |d(area)/dt + int FH| / int FH = " + fmt(worst);
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// evolution residuals
////////////////////////////////////////////////////////////////////////////////
EvolutionResidual evolution_residual(const FlowHistory &h, EvolutionQuantity q, int index, int i, double margin)
{
    const SpeedFunction speed = history_speed(h);
    FieldCache cache(h, speed);
    return evolution_residual_impl(h, speed, cache, q, index, i, margin);
}

MonitorReport evolution_report(const FlowHistory &h, EvolutionQuantity q, int samples, double tolerance,
                               std::uint64_t seed)
{
    require_entries(h, 3, "evolution residual");
    const SpeedFunction speed = history_speed(h);
    FieldCache cache(h, speed);
    MonitorReport r;
    r.name = "evolution_" + quantity_name(q);
    r.tolerance = tolerance;
    r.parameters["samples"] = std::to_string(samples);
    r.parameters["seed"] = std::to_string(seed);
    std::vector<double> worst_series, count_series;
    double worst = q == EvolutionQuantity::F ? 0.0 : kInf;
    int used = 0;
    for (int i = 1; i + 1 < int(h.entries.size()); ++i) {
        double w = q == EvolutionQuantity::F ? 0.0 : kInf;
        int count = 0;
        for (int node : sample_nodes(surf(h, i).size(), samples, seed, i)) {
            EvolutionResidual e = evolution_residual_impl(h, speed, cache, q, node, i, 1e-3);
            if (!e.in_domain || !(e.scale > 0.0)) continue;
            const double rel = e.residual / e.scale;
            w = q == EvolutionQuantity::F ? std::max(w, std::abs(rel)) : std::min(w, rel);
            ++count;
        }
        r.times.push_back(h.entries[i].summary.t);
        r.snapshots.push_back(i);
        worst_series.push_back(count ? w : kNaN);
        count_series.push_back(count);
        if (count) worst = q == EvolutionQuantity::F ? std::max(worst, w) : std::min(worst, w);
        used += count;
    }
    r.series[q == EvolutionQuantity::F ? "max_abs_relative_residual" : "min_relative_slack"] = worst_series;
    r.series["points_in_domain"] = count_series;
    r.scalars["points"] = used;
    if (used == 0) {
        r.verdict = Verdict::Informational;
        r.detail = "no sampled point in the domain";
        return r;
    }
    r.scalars[q == EvolutionQuantity::F ? "max_abs_relative_residual" : "min_relative_slack"] = worst;
    if (q == EvolutionQuantity::F) {
        r.verdict = worst <= tolerance ? Verdict::Pass : Verdict::Fail;
        r.detail = "max |(d/dt - Delta_F)F - |A|_F^2 F| / (|A|_F^2 F) = " + fmt(worst);
    } else {
        r.verdict = worst >= -tolerance ? Verdict::Pass : Verdict::Fail;
        r.detail = "min relative slack " + fmt(worst) + " over " + std::to_string(used) + " points";
    }
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// pinching ratios
////////////////////////////////////////////////////////////////////////////////
std::string to_string(PinchingSeriesKind k)
{
    switch (k) {
        case PinchingSeriesKind::Cylindrical: return "cylindrical";
        case PinchingSeriesKind::Convexity: return "convexity";
        case PinchingSeriesKind::Inscribed: return "inscribed";
        case PinchingSeriesKind::Exscribed: return "exscribed";
        case PinchingSeriesKind::NoncollapseInterior: return "noncollapse_interior";
        case PinchingSeriesKind::NoncollapseExterior: return "noncollapse_exterior";
        case PinchingSeriesKind::CylDistanceAtMax: return "cyl_distance_at_max";
    }
    return "?";
}

PinchingSeriesKind pinching_series_kind_from_string(const std::string &name)
{
    for (auto k : {PinchingSeriesKind::Cylindrical, PinchingSeriesKind::Convexity, PinchingSeriesKind::Inscribed,
                   PinchingSeriesKind::Exscribed, PinchingSeriesKind::NoncollapseInterior,
                   PinchingSeriesKind::NoncollapseExterior, PinchingSeriesKind::CylDistanceAtMax})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown pinching series '" + name +
                      "'; available: cylindrical, convexity, inscribed, exscribed, noncollapse_interior, "
                      "noncollapse_exterior, cyl_distance_at_max");
}

double pinching_ratio(const Surface &s, const SpeedFunction &speed, PinchingSeriesKind kind, int m)
{
    if (m < 0 || m > s.dim() - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");
    const bool needs_c = kind == PinchingSeriesKind::Cylindrical || kind == PinchingSeriesKind::Inscribed;
    const double c_m = needs_c ? cylinder_constant(speed, m) : 0.0;
    Vector F = speed_values(s, speed);
    if (kind == PinchingSeriesKind::CylDistanceAtMax) {
        int arg = 0;
        for (int i = 1; i < s.size(); ++i)
            if (F[i] > F[arg]) arg = i;
        return cyl_distance(s.point(arg).kappa, m);
    }
    double best = is_max_kind(kind) ? -kInf : kInf;
    for (int i = 0; i < s.size(); ++i) {
        const CurvatureTuple &k = s.point(i).kappa;
        double v = 0.0;
        switch (kind) {
            case PinchingSeriesKind::Cylindrical: v = (k.max() - c_m * F[i]) / F[i]; break;
            case PinchingSeriesKind::Convexity: v = k.min() / F[i]; break;
            case PinchingSeriesKind::Inscribed: v = (s.inscribed_curvature(i) - c_m * F[i]) / F[i]; break;
            case PinchingSeriesKind::Exscribed:
            case PinchingSeriesKind::NoncollapseExterior: v = s.exscribed_curvature(i) / F[i]; break;
            case PinchingSeriesKind::NoncollapseInterior: v = s.inscribed_curvature(i) / F[i]; break;
            case PinchingSeriesKind::CylDistanceAtMax: break;
        }
        best = is_max_kind(kind) ? std::max(best, v) : std::min(best, v);
    }
    return best;
}

MonitorReport pinching_series(const FlowHistory &h, PinchingSeriesKind kind, int m, double slack_fraction,
                              std::optional<double> transient)
{
    require_entries(h, 1, "pinching series");
    const SpeedFunction speed = history_speed(h);
    MonitorReport r;
    r.name = "pinching_" + to_string(kind);
    r.parameters["m"] = std::to_string(m);
    r.parameters["slack_fraction"] = fmt(slack_fraction);
    if (transient) r.parameters["transient"] = fmt(*transient);

    std::vector<double> values;
    bool all_convex = true;
    for (int i = 0; i < int(h.entries.size()); ++i) {
        std::optional<double> v = summary_ratio(h, i, kind, m);
        values.push_back(v ? *v : pinching_ratio(surf(h, i), speed, kind, m));
        r.times.push_back(h.entries[i].summary.t);
        r.snapshots.push_back(i);
        if (kind == PinchingSeriesKind::NoncollapseExterior) all_convex = all_convex && convex_snapshot(surf(h, i));
    }
    r.series["ratio"] = values;
    r.scalars["initial"] = values.front();
    r.scalars["final"] = values.back();
    r.scalars["max"] = *std::max_element(values.begin(), values.end());
    r.scalars["min"] = *std::min_element(values.begin(), values.end());

    // Which claim applies.
    bool monotone = false;
    std::string reason;
    size_t start = 0;
    if (kind == PinchingSeriesKind::NoncollapseInterior) {
        monotone = speed.concave();
        reason = monotone ? "concave speed: max kbar/F non-increasing" : "speed is not concave";
    } else if (kind == PinchingSeriesKind::NoncollapseExterior) {
        if (speed.convex()) {
            monotone = true;
            reason = "convex speed: min kunder/F non-decreasing";
        } else if (speed.concave() && all_convex && inverse_concave(speed)) {
            monotone = true;
            reason = "concave, inverse-concave speed on convex snapshots: min kunder/F non-decreasing";
        } else {
            reason = "speed is neither convex nor concave and inverse-concave on a convex solution";
        }
    } else if (transient) {
        monotone = true;
        start = std::min(values.size() - 1, size_t(std::ceil(*transient * double(values.size() - 1))));
        reason = std::string(is_max_kind(kind) ? "non-increasing" : "non-decreasing") + " after snapshot " +
                 std::to_string(start);
    }
    if (!monotone) {
        r.verdict = Verdict::Informational;
        r.detail = reason.empty() ? "no monotonicity claim without a transient" : reason;
        return r;
    }

    // Absolute floor for ratios that vanish identically (spheres).
    const double slack = slack_fraction * std::abs(values[start]) + 1e-10;
    r.tolerance = slack;
    double extreme = values[start], worst = 0.0;
    int worst_at = -1;
    for (size_t i = start + 1; i < values.size(); ++i) {
        const double excess = is_max_kind(kind) ? values[i] - extreme : extreme - values[i];
        if (excess > worst) worst = excess, worst_at = int(i);
        extreme = is_max_kind(kind) ? std::min(extreme, values[i]) : std::max(extreme, values[i]);
    }
    r.scalars["worst_excess"] = worst;
    r.verdict = worst <= slack ? Verdict::Pass : Verdict::Fail;
    r.detail = reason + "; worst excess " + fmt(worst) + (worst_at >= 0 ? " at snapshot " + std::to_string(worst_at) : "") +
               ", slack " + fmt(slack);
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// L^p norms
////////////////////////////////////////////////////////////////////////////////
double log_lp_norm(const Surface &s, const PinchingContext &ctx)
{
    validate(ctx);
    if (s.dim() != ctx.dim()) throw DimensionMismatch("pinching context and surface dimensions differ");
    std::vector<double> terms;
    terms.reserve(s.size());
    for (int i = 0; i < s.size(); ++i) {
        std::optional<double> up, low;
        if (ctx.kind == PinchingKind::Inscribed) up = s.inscribed_curvature(i);
        if (ctx.kind == PinchingKind::Exscribed) low = s.exscribed_curvature(i);
        const double g = g_sigma(ctx, s.point(i).kappa, up, low).positive_part;
        terms.push_back(g > 0.0 ? ctx.p * std::log(g) + std::log(s.weight(i)) : -kInf);
    }
    const double v = log_sum_exp(terms);
    if (std::isnan(v) || v == kInf) throw DegenerateInput("L^p accumulation overflowed");
    return v;
}

MonitorReport lp_pinching_norm(const FlowHistory &h, const PinchingContext &ctx, double slack)
{
    require_entries(h, 1, "L^p norm");
    MonitorReport r;
    r.name = "lp_" + to_string(ctx.kind);
    r.tolerance = slack;
    r.parameters = {{"m", std::to_string(ctx.m)}, {"epsilon", fmt(ctx.epsilon)}, {"sigma", fmt(ctx.sigma)},
                    {"p", std::to_string(ctx.p)}, {"K", fmt(ctx.K)}, {"theta", fmt(ctx.theta)}};

    // Allowed growth between snapshots: sigma K^p times the time integral of
    // int |A|_F^2 (zero unless K > 0).
    std::vector<double> logs, normA;
    for (int i = 0; i < int(h.entries.size()); ++i) {
        const Surface &s = surf(h, i);
        logs.push_back(log_lp_norm(s, ctx));
        double a = 0.0;
        if (ctx.K > 0.0)
            for (int k = 0; k < s.size(); ++k) a += sum_fdot_kappa2(*ctx.speed, s.point(k)) * s.weight(k);
        normA.push_back(a);
        r.times.push_back(h.entries[i].summary.t);
        r.snapshots.push_back(i);
    }
    r.series["log_norm"] = logs;

    std::vector<double> bound(logs.size(), kNaN);
    double worst = -kInf;
    int worst_at = -1;
    std::string failure;
    for (size_t i = 1; i < logs.size(); ++i) {
        const double dt = r.times[i] - r.times[i - 1];
        const double allowance = ctx.sigma * std::pow(ctx.K, ctx.p) * 0.5 * (normA[i] + normA[i - 1]) * dt;
        bound[i] = log_add(logs[i - 1] + std::log1p(slack), allowance > 0.0 ? std::log(allowance) : -kInf);
        if (logs[i] == -kInf) continue;
        const double excess = logs[i] - bound[i];
        if (excess > worst) worst = excess, worst_at = int(i);
    }
    r.series["log_bound"] = bound;
    int first_empty = -1;
    for (size_t i = 0; i < logs.size(); ++i)
        if (logs[i] == -kInf) {
            first_empty = int(i);
            break;
        }
    r.scalars["first_empty_snapshot"] = first_empty;
    r.scalars["initial_log_norm"] = logs.front();
    r.scalars["final_log_norm"] = logs.back();
    r.scalars["worst_excess"] = logs.size() > 1 ? worst : kNaN;
    r.verdict = worst <= 0.0 ? Verdict::Pass : Verdict::Fail;
    if (worst_at >= 0 && worst > 0.0 && logs[worst_at - 1] == -kInf)
        failure = "support reappeared at snapshot " + std::to_string(worst_at);
    else if (worst > 0.0)
        failure = "log norm rose by " + fmt(worst) + " beyond the slack at snapshot " + std::to_string(worst_at);
    r.detail = r.verdict == Verdict::Pass
                   ? (first_empty >= 0 ? "non-increasing; support empty from snapshot " + std::to_string(first_empty)
                                       : "non-increasing within slack")
                   : failure;
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// Poincare
////////////////////////////////////////////////////////////////////////////////
MonitorReport poincare_check(const Surface &s, const Vector &u, double r, int m, double support_margin)
{
    if (u.size() != s.size()) throw DimensionMismatch("field size differs from node count");
    if (!(r > 0.0)) throw ConfigError("r must be positive");
    const int n = s.dim();
    if (m < 0 || m > n - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");
    double closest = kInf;
    for (int i = 0; i < s.size(); ++i) {
        if (u[i] == 0.0) continue;
        for (int j = m; j < n; ++j) {
            const double d = cyl_distance(s.point(i).kappa, j);
            closest = std::min(closest, d);
            if (!(d > support_margin))
                throw DegenerateInput("support of u reaches node " + std::to_string(i) + " at cyl_distance " + fmt(d) +
                                      " from Cyl_" + std::to_string(j) + ", margin is " + fmt(support_margin));
        }
    }
    double lhs = 0.0, grad_u = 0.0, grad_A = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        const PointGeometry &p = s.point(i);
        const double w = s.weight(i);
        lhs += u[i] * u[i] * p.norm_A * p.norm_A * w;
        grad_u += s.field_derivatives(u, i).gradient.squaredNorm() * w;
        if (u[i] != 0.0) {
            const double g = s.curvature_gradient_norm(i);
            grad_A += u[i] * u[i] * g * g / (p.H * p.H) * w;
        }
    }
    MonitorReport rep;
    rep.name = "poincare";
    rep.parameters = {{"r", fmt(r)}, {"m", std::to_string(m)}, {"support_margin", fmt(support_margin)}};
    const double rhs = grad_u / r + (1.0 + r) * grad_A;
    rep.scalars = {{"lhs", lhs}, {"rhs", rhs}, {"grad_u_term", grad_u / r}, {"grad_A_term", (1.0 + r) * grad_A},
                   {"support_cyl_distance", closest}};
    rep.verdict = Verdict::Informational;
    if (!(lhs > 0.0)) {
        rep.scalars["gamma"] = kNaN;
        rep.detail = "degenerate: int u^2 |A|^2 = 0";
        return rep;
    }
    rep.scalars["gamma"] = rhs / lhs;
    rep.detail = "empirical gamma = " + fmt(rhs / lhs);
    return rep;
}

////////////////////////////////////////////////////////////////////////////////
// Harnack
////////////////////////////////////////////////////////////////////////////////
namespace {

double harnack_impl(const FlowHistory &h, FieldCache &cache, int index, int i, double t0)
{
    require_interior(h, i);
    const Surface &s = surf(h, i);
    const PointGeometry &p = s.point(index);
    const double t = h.entries[i].summary.t;
    if (!(t > t0)) throw ConfigError("Harnack base time t0 must precede the snapshot time");
    for (int k = 0; k < s.dim(); ++k)
        if (!(p.principal[k] > 0.0))
            throw DegenerateInput("node " + std::to_string(index) + " is not strictly convex; A^-1 undefined");
    const Vector &F = cache.F(i);
    const int prev = track(h, i, index, i - 1), next = track(h, i, index, i + 1);
    const double dtF = central_difference(h, i, cache.F(i - 1)[prev], F[index], cache.F(i + 1)[next]);
    const Vector g = s.field_derivatives(F, index).gradient;
    double inv = 0.0;
    for (int k = 0; k < s.dim(); ++k) inv += g[k] * g[k] / p.principal[k];
    const double tail = std::isinf(t0) ? 0.0 : F[index] / (2.0 * (t - t0));
    return dtF - inv + tail;
}

}  // namespace

double harnack_quantity(const FlowHistory &h, int index, int i, double t0)
{
    const SpeedFunction speed = history_speed(h);
    FieldCache cache(h, speed);
    return harnack_impl(h, cache, index, i, t0);
}

MonitorReport harnack_report(const FlowHistory &h, double t0, int samples, std::uint64_t seed)
{
    require_entries(h, 3, "Harnack quantity");
    const SpeedFunction speed = history_speed(h);
    FieldCache cache(h, speed);
    MonitorReport r;
    r.name = "harnack";
    r.parameters = {{"t0", fmt(t0)}, {"samples", std::to_string(samples)}, {"seed", std::to_string(seed)}};
    const double diam0 = h.initial_diameter > 0.0 ? h.initial_diameter : snapshot_geometry(h, 0).diameter;
    std::vector<double> mins, normalized;
    double worst_margin = kInf;
    bool convex = true;
    for (int i = 1; i + 1 < int(h.entries.size()); ++i) {
        const Surface &s = surf(h, i);
        if (!convex_snapshot(s)) {
            convex = false;
            break;
        }
        double mn = kInf;
        for (int node : sample_nodes(s.size(), samples, seed, i)) mn = std::min(mn, harnack_impl(h, cache, node, i, t0));
        const double scale = h.entries[i].summary.max_F * h.entries[i].summary.max_F / diam0;
        r.times.push_back(h.entries[i].summary.t);
        r.snapshots.push_back(i);
        mins.push_back(mn);
        normalized.push_back(mn / scale);
        worst_margin = std::min(worst_margin, mn / scale);
    }
    r.series["min_quantity"] = mins;
    r.series["min_normalized"] = normalized;
    r.scalars["min_normalized"] = worst_margin;
    r.tolerance = 1e-3;
    if (!convex) {
        r.verdict = Verdict::Informational;
        r.detail = "solution is not strictly convex at every snapshot";
        return r;
    }
    const bool applies = speed.convex() || inverse_concave(speed);
    if (!applies) {
        r.verdict = Verdict::Informational;
        r.detail = "speed is neither convex nor inverse-concave; min normalized " + fmt(worst_margin);
        return r;
    }
    r.verdict = worst_margin >= -r.tolerance ? Verdict::Pass : Verdict::Fail;
    r.detail = "min quantity / (max F^2 / initial diameter) = " + fmt(worst_margin);
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// ancient solutions
////////////////////////////////////////////////////////////////////////////////
double power_law_exponent(const std::vector<double> &x, const std::vector<double> &y)
{
    if (x.size() != y.size() || x.size() < 2) throw DegenerateInput("power-law fit needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double N = double(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DegenerateInput("power-law fit needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    const double den = N * sxx - sx * sx;
    if (!(den > 0.0)) throw DegenerateInput("power-law fit abscissae coincide");
    return (N * sxy - sx * sy) / den;
}

MonitorReport ancient_diagnostics(const FlowHistory &h, const AncientOptions &opt)
{
    require_entries(h, 3, "ancient diagnostics");
    const double T = opt.extinction_time;
    if (!(T > h.entries.back().summary.t)) throw ConfigError("extinction time must follow the last snapshot");
    const SpeedFunction speed = history_speed(h);
    const int N = int(h.entries.size());
    const int n = surf(h, 0).dim();
    MonitorReport r;
    r.name = "ancient";
    r.parameters = {{"extinction_time", fmt(T)}, {"k", std::to_string(opt.k)}, {"p", fmt(opt.p)}};

    std::vector<double> tau, type1, fratio, ecc, dscaled, iso, grad, intF, cond6, maxF, intHp;
    for (int i = 0; i < N; ++i) {
        const Surface &s = surf(h, i);
        const double t = h.entries[i].summary.t;
        const double ta = T - t;
        const GlobalGeometry g = snapshot_geometry(h, i);
        Vector F = speed_values(s, speed), H(s.size());
        for (int k = 0; k < s.size(); ++k) H[k] = s.point(k).H;
        double mx = -kInf, mn = kInf, gr = 0.0, fI = 0.0, hp = 0.0, worst6 = kInf;
        for (int k = 0; k < s.size(); ++k) {
            const PointGeometry &p = s.point(k);
            mx = std::max(mx, F[k]);
            mn = std::min(mn, F[k]);
            const double gA = s.curvature_gradient_norm(k);
            gr = std::max(gr, gA * gA / std::pow(F[k], 4));
            fI += F[k] * s.weight(k);
            hp += std::pow(p.H, opt.p) * s.weight(k);
            // <grad H/H, grad F/F> <= (|A°|^2 + k H^2/(n(n+k))) / (n+k-1), relative to H^2
            const Vector gH = s.field_derivatives(H, k).gradient, gF = s.field_derivatives(F, k).gradient;
            const double lhs = gH.dot(gF) / (p.H * F[k]);
            const double traceless = p.norm_A * p.norm_A - p.H * p.H / n;
            const double rhs = (traceless + opt.k * p.H * p.H / (n * (n + opt.k))) / (n + opt.k - 1);
            worst6 = std::min(worst6, (rhs - lhs) / (p.H * p.H));
        }
        tau.push_back(ta);
        type1.push_back(std::sqrt(ta) * mx);
        fratio.push_back(mx / mn);
        ecc.push_back(g.circumradius / g.inradius);
        dscaled.push_back(g.diameter / std::sqrt(ta));
        iso.push_back(std::pow(g.area, n + 1) / std::pow(g.volume, n));
        grad.push_back(gr);
        intF.push_back(fI);
        cond6.push_back(worst6);
        maxF.push_back(mx);
        intHp.push_back(hp);
        r.times.push_back(t);
        r.snapshots.push_back(i);
    }

    // int_t^T int F = int_t^{t_last} int F + |Omega_{t_last}|.
    std::vector<double> remaining(N);
    remaining[N - 1] = snapshot_geometry(h, N - 1).volume;
    for (int i = N - 2; i >= 0; --i)
        remaining[i] = remaining[i + 1] + power_segment_integral(tau[i + 1], intF[i + 1], tau[i], intF[i]);

    r.series["sqrt_tau_max_F"] = type1;
    r.series["max_F_over_min_F"] = fratio;
    r.series["eccentricity"] = ecc;
    r.series["diameter_over_sqrt_tau"] = dscaled;
    r.series["isoperimetric"] = iso;
    r.series["max_grad_ratio"] = grad;
    r.series["remaining_integral_F"] = remaining;
    r.series["condition_vi_margin"] = cond6;
    r.series["max_F"] = maxF;
    r.series["integral_H_p"] = intHp;

    auto spread = [](const std::vector<double> &v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return (*hi - *lo) / std::abs(*hi);
    };
    r.scalars["r_hat"] = power_law_exponent(tau, remaining);
    r.scalars["sqrt_tau_max_F_spread"] = spread(type1);
    r.scalars["max_eccentricity"] = *std::max_element(ecc.begin(), ecc.end());
    r.scalars["max_grad_ratio"] = *std::max_element(grad.begin(), grad.end());
    r.scalars["max_F_over_min_F"] = *std::max_element(fratio.begin(), fratio.end());
    r.scalars["min_condition_vi_margin"] = *std::min_element(cond6.begin(), cond6.end());
    r.verdict = Verdict::Informational;
    r.detail = "r_hat = " + fmt(r.scalars["r_hat"]) + ", sqrt(T-t) max F spread " + fmt(r.scalars["sqrt_tau_max_F_spread"]);
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// Gauss integral
////////////////////////////////////////////////////////////////////////////////
MonitorReport gauss_integral(const Surface &s, double tolerance_fraction)
{
    const auto *mesh = dynamic_cast<const TriMesh *>(&s);
    if (!mesh) throw ConfigError("the Gauss integral is implemented for n = 2 meshes only");
    const double target = 4.0 * M_PI * (1.0 - mesh->genus());
    const double v = mesh->gauss_integral();
    MonitorReport r;
    r.name = "gauss_integral";
    r.tolerance = tolerance_fraction * 4.0 * M_PI;
    r.parameters["genus"] = std::to_string(mesh->genus());
    r.scalars = {{"integral", v}, {"expected", target}, {"error_over_4pi", (v - target) / (4.0 * M_PI)}};
    r.verdict = std::abs(v - target) <= r.tolerance ? Verdict::Pass : Verdict::Fail;
    r.detail = "int K = " + fmt(v) + ", expected " + fmt(target);
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// artifacts
////////////////////////////////////////////////////////////////////////////////
std::string report_json(const MonitorReport &r)
{
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["verdict"] = to_string(r.verdict);
    j["tolerance"] = number(r.tolerance);
    j["detail"] = r.detail;
    j["parameters"] = r.parameters;
    nlohmann::ordered_json sc = nlohmann::ordered_json::object();
    for (auto &[k, v] : r.scalars) sc[k] = number(v);
    j["scalars"] = sc;
    j["snapshots"] = r.snapshots;
    nlohmann::ordered_json times = nlohmann::ordered_json::array();
    for (double t : r.times) times.push_back(number(t));
    j["times"] = times;
    nlohmann::ordered_json series = nlohmann::ordered_json::object();
    for (auto &[k, vals] : r.series) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (double v : vals) arr.push_back(number(v));
        series[k] = arr;
    }
    j["series"] = series;
    return j.dump(2) + "\n";
}

std::string combined_csv(const std::vector<MonitorReport> &reports)
{
    std::set<double> times;
    std::vector<std::pair<std::string, std::map<double, double>>> columns;
    for (const MonitorReport &r : reports)
        for (auto &[key, vals] : r.series) {
            std::map<double, double> col;
            for (size_t i = 0; i < vals.size() && i < r.times.size(); ++i) {
                col[r.times[i]] = vals[i];
                times.insert(r.times[i]);
            }
            columns.emplace_back(r.name + "." + key, std::move(col));
        }
    std::ostringstream os;
    os << "t";
    for (auto &c : columns) os << "," << c.first;
    os << "\n";
    char buf[40];
    for (double t : times) {
        std::snprintf(buf, sizeof buf, "%.17g", t);
        os << buf;
        for (auto &c : columns) {
            os << ",";
            auto it = c.second.find(t);
            if (it != c.second.end()) {
                std::snprintf(buf, sizeof buf, "%.17g", it->second);
                os << buf;
            }
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace cflow
