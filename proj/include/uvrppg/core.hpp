#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace uvrppg {

inline constexpr int kLandmarkCount = 468;
inline constexpr double kPi = 3.14159265358979323846;

// Errors carry enough context (frame/triangle/vertex index, stage name) to be
// actionable from the CLI without a debugger.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidInputError : Error {
    using Error::Error;
};
struct DegenerateGeometryError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.y}; }

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    if (n == 0.0) throw DegenerateGeometryError("cannot normalize zero-length vector");
    return {a.x / n, a.y / n, a.z / n};
}

inline double deg_from_rad(double rad) { return rad * (180.0 / kPi); }
inline double rad_from_deg(double deg) { return deg * (kPi / 180.0); }

// arccos of a clamped dot product, in degrees. Clamping guards against
// |cos| drifting past 1 from rounding.
inline double angle_deg_between_units(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(dot(a, b), -1.0, 1.0);
    return deg_from_rad(std::acos(c));
}

}  // namespace uvrppg
