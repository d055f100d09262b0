#include "splatgen/compose.hpp"

#include <set>

namespace splatgen {

GaussianCloud translate_cloud(const GaussianCloud& cloud, const Vec3& t) {
    if (!is_finite(t)) throw PreconditionError("translate_cloud: non-finite translation");
    GaussianCloud out = cloud;
    for (Gaussian& g : out.splats) g.mean += t;
    return out;
}

GaussianCloud transform_cloud(const GaussianCloud& cloud, const RigidTransform& transform) {
    if (!is_finite(transform.translation) || !is_finite(transform.rotation) ||
        std::abs(transform.rotation.norm() - 1.0) > 1e-9) {
        throw PreconditionError("transform_cloud: invalid rigid transform");
    }
    GaussianCloud out = cloud;
    const Quat rq = transform.rotation;
    const ShRotation sh_op = sh_rotation_from(rq.toRotationMatrix());
    for (Gaussian& g : out.splats) {
        g.mean = transform.apply(g.mean);
        g.orientation = (rq * g.orientation).normalized();
        for (int c = 0; c < 3; ++c) {
            g.sh.row(c) = rotate_sh(g.sh.row(c).transpose(), sh_op).transpose();
        }
    }
    return out;
}

GaussianCloud merge_clouds(std::span<const CloudPart> parts) {
    std::set<int> seen;
    size_t total = 0;
    for (const CloudPart& part : parts) {
        if (part.cloud == nullptr) throw PreconditionError("merge_clouds: null part");
        if (!seen.insert(part.object_id).second) {
            throw ConfigError("merge_clouds: duplicate object_id " +
                              std::to_string(part.object_id));
        }
        total += part.cloud->size();
    }
    GaussianCloud out;
    out.splats.reserve(total);
    out.splat_object_ids.reserve(total);
    for (const CloudPart& part : parts) {
        out.splats.insert(out.splats.end(), part.cloud->splats.begin(),
                          part.cloud->splats.end());
        out.splat_object_ids.insert(out.splat_object_ids.end(), part.cloud->size(),
                                    part.object_id);
    }
    return out;
}

} // namespace splatgen
