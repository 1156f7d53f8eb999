// History directories:
//
//   manifest.json              configuration echo, termination, snapshot index
//   series.csv                 one row of scalar summaries per snapshot
//   snapshots/NNNN.obj|.csv    mesh vertices/faces, or profile nodes x,r
//   snapshots/NNNN.meta.json   time, step, representation data
//
// Floats are written with 17 significant digits, so reading a directory back
// rebuilds bit-identical snapshots.
#ifndef CFLOW_HISTORY_IO_HPP
#define CFLOW_HISTORY_IO_HPP

#include "cflow/config_io.hpp"

namespace cflow {

void write_history(const FlowHistory &h, const RunConfig &cfg, const std::string &dir);

struct StoredHistory {
    RunConfig config;
    FlowHistory history;
};
StoredHistory read_history(const std::string &dir);

std::string series_csv(const FlowHistory &h);

/// Profile spheres on the exact law R(t) = sqrt(R0^2 - 2 f(1) t) at `count`
/// evenly spaced times from 0 to `t_end` (< extinction). Radius, dimension
/// and resolution come from cfg.shape.
FlowHistory exact_sphere_history(const FlowConfig &cfg, int count, double t_end);
double sphere_extinction_time(const FlowConfig &cfg);

}  // namespace cflow

#endif
