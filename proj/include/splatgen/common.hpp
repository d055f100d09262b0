#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace splatgen {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Base for all errors thrown by this library. The CLI maps subclasses onto
// exit codes: configuration/usage problems exit 2, operational failures exit 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: malformed splat PLY, non-finite fields, broken mesh files.
class InvalidAssetError : public Error {
public:
    using Error::Error;
};

// Bad user-supplied parameters or manifest content.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An operation was called outside its contract.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Surface reconstruction failed (degenerate input, empty complex, ...).
class ReconstructionError : public Error {
public:
    using Error::Error;
};

// Physics produced non-finite state.
class SimulationError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

inline bool is_finite(const Quat& q) {
    return std::isfinite(q.w()) && std::isfinite(q.x()) && std::isfinite(q.y()) &&
           std::isfinite(q.z());
}

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void extend(const Aabb& other) {
        min = min.cwiseMin(other.min);
        max = max.cwiseMax(other.max);
    }
    bool empty() const { return (min.array() > max.array()).any(); }
    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extent() const { return max - min; }
    double diagonal() const { return empty() ? 0.0 : extent().norm(); }
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    bool overlaps(const Aabb& o) const {
        return (min.array() <= o.max.array()).all() && (max.array() >= o.min.array()).all();
    }
    Aabb dilated(double margin) const {
        Aabb out;
        out.min = min - Vec3::Constant(margin);
        out.max = max + Vec3::Constant(margin);
        return out;
    }
};

} // namespace splatgen
