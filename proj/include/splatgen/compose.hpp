#pragma once

#include "splatgen/splat_model.hpp"

#include <span>
#include <utility>
#include <vector>

namespace splatgen {

// Rigid 6-DoF transform: x -> R x + t, rotation kept as a unit quaternion.
struct RigidTransform {
    Quat rotation = Quat::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }

    RigidTransform inverse() const {
        RigidTransform inv;
        inv.rotation = rotation.conjugate();
        inv.translation = -(inv.rotation * translation);
        return inv;
    }

    // Composition: (*this) after other, i.e. apply(other.apply(x)).
    RigidTransform operator*(const RigidTransform& other) const {
        RigidTransform out;
        out.rotation = (rotation * other.rotation).normalized();
        out.translation = rotation * other.translation + translation;
        return out;
    }
};

// Shifts splat means by t; every other field is untouched.
GaussianCloud translate_cloud(const GaussianCloud& cloud, const Vec3& t);

// Full rigid transform: means move, orientations compose with the rotation,
// SH coefficients rotate band-wise, opacity and scale magnitudes stay fixed.
GaussianCloud transform_cloud(const GaussianCloud& cloud, const RigidTransform& transform);

struct CloudPart {
    const GaussianCloud* cloud = nullptr;
    int object_id = 0;
};

// Concatenates parts in order, tagging each splat with its part's object id.
// Object ids must be unique across parts (0 is the environment).
GaussianCloud merge_clouds(std::span<const CloudPart> parts);

} // namespace splatgen
