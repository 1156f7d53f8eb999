// Monitor selection and report emission shared by the command-line tool and
// the acceptance harness.
#ifndef CFLOW_ANALYSIS_HPP
#define CFLOW_ANALYSIS_HPP

#include "cflow/certify.hpp"
#include "cflow/config_io.hpp"
#include "cflow/monitors.hpp"

namespace cflow {

/// Monitors used when the configuration lists none. Sampled monitors are
/// included only when a seed is configured.
std::vector<MonitorSpec> default_monitors(const RunConfig &cfg, const FlowHistory &h);

MonitorReport run_monitor(const RunConfig &cfg, const FlowHistory &h, const MonitorSpec &spec);
std::vector<MonitorReport> run_monitors(const RunConfig &cfg, const FlowHistory &h);

/// ancient: T - t_last = (n+1)/2 |Omega| / int F at the last snapshot (exact for spheres).
double estimate_extinction_time(const FlowHistory &h);

MonitorReport certification_report(const CertificationReport &c);
std::vector<MonitorReport> run_certification(const RunConfig &cfg);

MonitorReport probe_report(const RunConfig &cfg, const ProbeSpec &probe);
std::vector<MonitorReport> run_probes(const RunConfig &cfg);

/// reports/<name>.json for each report plus monitors.csv; names made unique.
void write_reports(const std::vector<MonitorReport> &reports, const std::string &dir);

bool any_failed(const std::vector<MonitorReport> &reports);

}  // namespace cflow

#endif
