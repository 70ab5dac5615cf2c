#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gpgf {

// Coordinates are padded to 3 components; unused ones stay zero so the same
// potential/initial callables work in every dimension.
using Vec3 = std::array<double, 3>;

inline constexpr double kGeomTol = 1e-12;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PointOutsideDomain : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SolverDiverged : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };
struct ZeroState : Error { using Error::Error; };
struct ZeroTilde : Error { using Error::Error; };
struct MeshMismatch : Error { using Error::Error; };
struct EmptyInteriorSpace : Error { using Error::Error; };
struct UnknownPreset : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

inline double dist(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace gpgf
