// Shared aliases, error types and the deterministic seeding helpers.
#ifndef CFLOW_COMMON_HPP
#define CFLOW_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A curvature tuple left the domain cone of a speed (a "type-0" hazard).
class ConeViolation : public Error {
public:
    using Error::Error;
};

/// Input that a numerical routine cannot handle (collapsed stencil,
/// coincident eigenvalues without a limit rule, zero tuple, ...).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// File missing, unreadable or malformed; the message names the path.
class IoError : public Error {
public:
    using Error::Error;
};

// splitmix64 finalizer; gives statistically independent per-index seeds so
// that sampled reports do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 indexed_rng(std::uint64_t seed, std::uint64_t index)
{
    return std::mt19937_64(derive_seed(seed, index));
}

}  // namespace cflow

#endif
