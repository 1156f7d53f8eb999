// Run configuration: JSON schema, validation and the effective-config echo.
#ifndef CFLOW_CONFIG_IO_HPP
#define CFLOW_CONFIG_IO_HPP

#include "cflow/flow.hpp"
#include "cflow/pinching.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cflow {

struct PinchingSpec {
    std::string kind = "cylindrical";  // cylindrical | inscribed | exscribed
    int m = 0;
    double epsilon = 0.05;
    double sigma = 0.1;
    int p = 10;
    double K = 0.0;
    std::optional<double> theta;  // default: computed over the cone
    ConeSpec cone{"speed", 0, 0.05};

    bool operator==(const PinchingSpec &) const = default;
};

struct MonitorSpec {
    // area_decay | evolution | pinching_series | lp_norm | poincare | harnack | ancient | gauss_integral
    std::string name;
    std::optional<double> tolerance;  // default per monitor
    std::string quantity = "F";  // evolution: F | inscribed | exscribed
    std::string series = "cylindrical";  // pinching_series kind
    int m = 0;
    double slack = 1e-3;
    std::optional<double> transient;
    int samples = 50;
    std::optional<double> t0;  // harnack: default the first snapshot time; -inf for ancient solutions
    std::optional<double> extinction_time;  // ancient: default extrapolated from the last snapshot
    int k = 1;
    double p = 4.0;
    int context = 0;  // index into the pinching list

    bool operator==(const MonitorSpec &) const = default;
};

struct ProbeSpec {
    std::string form = "g1_sign";  // g1_sign | g2_gamma | gradient_combined | trace_norm_sign
    int context = 0;
    int samples = 10000;
    double sigma = 1.0;  // gradient_combined

    bool operator==(const ProbeSpec &) const = default;
};

struct RunConfig {
    std::string command = "simulate";  // simulate | certify-speed | probe-q | analyze
    FlowConfig flow;
    std::vector<PinchingSpec> pinching;
    std::vector<MonitorSpec> monitors;
    std::vector<std::string> certify_properties{"one_homogeneous", "monotone", "concave", "convex",
                                                "inverse_concave"};
    int certify_samples = 2000;
    std::vector<ProbeSpec> probes;
    std::string output;
    std::optional<std::uint64_t> seed;

    bool operator==(const RunConfig &) const = default;
};

/// Parses and validates. Errors are ConfigError with a field path prefix.
RunConfig parse_config(const std::string &text);
/// Effective configuration with every default spelled out.
std::string emit_config(const RunConfig &cfg);
void validate(const RunConfig &cfg);

/// Dimension of the configured shape.
int config_dim(const RunConfig &cfg);
PinchingContext make_context(const RunConfig &cfg, int index);

std::string read_text(const std::string &path);
void write_text(const std::string &path, const std::string &text);

}  // namespace cflow

#endif
