// Explicit normal-velocity stepping of d/dt X = -F nu, with stop conditions
// and an in-memory history of snapshots and scalar summaries.
#ifndef CFLOW_FLOW_HPP
#define CFLOW_FLOW_HPP

#include "cflow/shapes.hpp"
#include "cflow/speed.hpp"

#include <limits>

namespace cflow {

struct ConeSpec {
    std::string type = "speed";  // speed | positive | m_convex | half_space
    int m = 0;
    double margin = 0.0;  // > 0 shrinks the cone

    bool operator==(const ConeSpec &) const = default;
};

SymmetricCone make_cone(const ConeSpec &spec, const SpeedFunction &speed);

struct FlowConfig {
    SpeedSpec speed{"mean_curvature"};
    ShapeSpec shape;
    ConeSpec cone;
    double c_cfl = 0.5;
    double max_time = std::numeric_limits<double>::infinity();
    long max_steps = 1000000;
    double blowup_factor = 1e3;  // stop when max F * initial diameter exceeds this
    double resolution_factor = 1.0;  // stop when min curvature radius < factor * h_min
    long snapshot_every = 50;
    bool remesh = true;
    int pinching_m = 0;
    bool full_summaries = true;  // inscribed/exscribed scans and radii per snapshot

    bool operator==(const FlowConfig &) const = default;
};

/// Lengths times lambda, times lambda^2.
FlowConfig scaled_config(const FlowConfig &cfg, double lambda);

struct SnapshotSummary {
    double t = 0.0;
    long step = 0;
    double max_F = 0.0, min_F = 0.0;
    int argmax_F = 0;
    double max_cyl_ratio = 0.0;  // max (kappa_n - c_m F)/F
    double min_convexity_ratio = 0.0;  // min kappa_1/F
    double max_insc_ratio = 0.0;  // max kbar/F
    double min_exsc_ratio = 0.0;  // min kunder/F
    double max_insc_pinching = 0.0;  // max (kbar - c_m F)/F
    double area = 0.0, volume = 0.0, inradius = 0.0, circumradius = 0.0, diameter = 0.0;
    double max_grad_ratio = 0.0;  // max |grad A|^2 / F^4
    std::vector<double> cyl_distance_at_max;  // cyl_distance(kappa, m) at argmax F, m = 0..n-1
    int remeshes = 0;  // cumulative
};

struct HistoryEntry {
    SnapshotSummary summary;
    SurfacePtr surface;
};

struct FlowHistory {
    FlowConfig config;
    std::vector<HistoryEntry> entries;
    std::string termination;  // cone_exit | blowup | resolution | max_steps | max_time | degenerate
    std::string termination_detail;
    long steps = 0;
    int remeshes = 0;
    double initial_diameter = 0.0;
};

/// c_cfl h_min^2 / (2 max sum fdot).
double stable_dt(const Surface &s, const SpeedFunction &speed, double c_cfl);

/// One explicit step. Throws ConeViolation ("type-0") if a node is outside `cone`.
std::unique_ptr<Surface> step(const Surface &s, const SpeedFunction &speed, const SymmetricCone &cone, double dt);

SnapshotSummary summarize(const Surface &s, const SpeedFunction &speed, int m, bool full);

FlowHistory run(const FlowConfig &cfg);
/// Run from a given initial surface (cfg.shape is ignored).
FlowHistory run(const FlowConfig &cfg, std::unique_ptr<Surface> initial);

}  // namespace cflow

#endif
