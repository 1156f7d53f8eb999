// Estimates evaluated over surfaces and flow histories. Every monitor is a
// pure function of its inputs.
#ifndef CFLOW_MONITORS_HPP
#define CFLOW_MONITORS_HPP

#include "cflow/flow.hpp"
#include "cflow/pinching.hpp"

#include <map>

namespace cflow {

enum class Verdict { Pass, Fail, Informational };
std::string to_string(Verdict v);

struct MonitorReport {
    std::string name;
    std::vector<double> times;
    std::map<std::string, std::vector<double>> series;  // each aligned with `times`
    std::map<std::string, double> scalars;
    double tolerance = 0.0;
    Verdict verdict = Verdict::Informational;
    std::string detail;
    std::map<std::string, std::string> parameters;
    std::vector<int> snapshots;
};

/// Node of snapshot `to` carrying the material point of node `index` of
/// snapshot `from`: same index while the connectivity is unchanged, else
/// closest-point projection.
int track(const FlowHistory &h, int from, int index, int to);

/// d/dt of per-node values at snapshot i by three-point differences.
double time_derivative(const FlowHistory &h, int i, int index, const std::function<double(int, int)> &value);

// area decay
double area_decay_residual(const FlowHistory &h, int i);
MonitorReport area_decay_report(const FlowHistory &h, double tolerance = 0.02);

// evolution residuals
enum class EvolutionQuantity { F, Inscribed, Exscribed };
struct EvolutionResidual {
    double lhs = 0.0;  // (d/dt - Delta_F) q
    double rhs = 0.0;  // |A|_F^2 q (+/- gradient term)
    double residual = 0.0;  // F: lhs - rhs; inscribed: rhs - lhs; exscribed: lhs - rhs
    double scale = 0.0;  // |A|_F^2 |q|, for relative tolerances
    bool in_domain = true;  // kbar > kappa_n (kunder < kappa_1) with margin
};
EvolutionResidual evolution_residual(const FlowHistory &h, EvolutionQuantity q, int index, int i,
                                     double margin = 1e-3);
/// Sign/equality check at `samples` nodes per interior snapshot.
MonitorReport evolution_report(const FlowHistory &h, EvolutionQuantity q, int samples, double tolerance,
                               std::uint64_t seed = 11);

// pinching ratios
enum class PinchingSeriesKind {
    Cylindrical,  // max (kappa_n - c_m F)/F
    Convexity,  // min kappa_1/F
    Inscribed,  // max (kbar - c_m F)/F
    Exscribed,  // min kunder/F
    NoncollapseInterior,  // max kbar/F
    NoncollapseExterior,  // min kunder/F
    CylDistanceAtMax,  // cyl_distance(kappa, m) where F is largest
};
std::string to_string(PinchingSeriesKind k);
PinchingSeriesKind pinching_series_kind_from_string(const std::string &name);
/// Per-snapshot extreme of the ratio. Monotone kinds (non-collapsing) get a
/// verdict with slack `slack_fraction` * |initial value|; others are checked
/// for decrease after `transient` (fraction of the snapshots), if given.
MonitorReport pinching_series(const FlowHistory &h, PinchingSeriesKind kind, int m, double slack_fraction = 1e-3,
                              std::optional<double> transient = std::nullopt);
double pinching_ratio(const Surface &s, const SpeedFunction &speed, PinchingSeriesKind kind, int m);

// L^p norm of the positive part of G_sigma
double log_lp_norm(const Surface &s, const PinchingContext &ctx);
MonitorReport lp_pinching_norm(const FlowHistory &h, const PinchingContext &ctx, double slack = 0.02);

// Poincare-type inequality
/// gamma = RHS/LHS for the field u. Support hypothesis: cyl_distance(kappa, j) > support_margin on supp u
/// for every j >= m (m = 0 excludes all cylinder directions, the sphere included).
MonitorReport poincare_check(const Surface &s, const Vector &u, double r, int m, double support_margin);

// Harnack quantity
double harnack_quantity(const FlowHistory &h, int index, int i, double t0);
MonitorReport harnack_report(const FlowHistory &h, double t0, int samples, std::uint64_t seed = 13);

// ancient-solution diagnostics
struct AncientOptions {
    double extinction_time = 0.0;
    int k = 1;  // condition (vi)
    double p = 4.0;  // integral of H^p
};
MonitorReport ancient_diagnostics(const FlowHistory &h, const AncientOptions &opt);
/// Least-squares slope of log y against log x.
double power_law_exponent(const std::vector<double> &x, const std::vector<double> &y);

// Gauss integral (meshes only)
MonitorReport gauss_integral(const Surface &s, double tolerance_fraction = 0.01);

// artifacts
std::string report_json(const MonitorReport &r);
/// One row per distinct time, one column per "<report>.<series>".
std::string combined_csv(const std::vector<MonitorReport> &reports);

}  // namespace cflow

#endif
