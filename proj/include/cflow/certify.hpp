// Sampling-based certification of the structural hypotheses on a speed:
// homogeneity, monotonicity, concavity/convexity in the matrix sense, and
// inverse-concavity. A report is a spot check, not a proof.
#ifndef CFLOW_CERTIFY_HPP
#define CFLOW_CERTIFY_HPP

#include "cflow/speed.hpp"

#include <optional>
#include <string>

namespace cflow {

enum class SpeedProperty { OneHomogeneous, Monotone, Concave, Convex, InverseConcave };

std::string to_string(SpeedProperty p);
SpeedProperty property_from_string(const std::string &name);

struct CertificationReport {
    SpeedProperty property;
    int samples = 0;
    /// Smallest signed margin seen; the property holds at a sample iff its
    /// margin is >= -tolerance.
    double worst_margin = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    Vector witness_kappa;
    Matrix witness_v;  // empty unless the property involves a direction
};

/// Samples uniformly on cone ∩ S^{n-1} with per-sample seeds derived from
/// `seed`. Inverse-concavity is always sampled inside Gamma_+ ∩ cone.
CertificationReport certify(const SpeedFunction &speed, const SymmetricCone &cone, SpeedProperty property,
                            int samples, std::uint64_t seed);

}  // namespace cflow

#endif
