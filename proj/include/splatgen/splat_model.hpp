#pragma once

#include "splatgen/common.hpp"
#include "splatgen/sh_math.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace splatgen {

// One anisotropic 3D Gaussian primitive. `scale` holds per-axis standard
// deviations in meters; the covariance is R * diag(scale)^2 * R^T.
struct Gaussian {
    Vec3 mean = Vec3::Zero();
    Vec3 scale = Vec3::Ones();
    Quat orientation = Quat::Identity(); // unit, (w, x, y, z)
    double opacity = 1.0;                // in [0, 1]
    Eigen::Matrix<double, 3, kShCoeffCount> sh =
        Eigen::Matrix<double, 3, kShCoeffCount>::Zero(); // channel x coefficient
};

struct GaussianCloud {
    std::vector<Gaussian> splats;
    int object_id = 0; // 0 is reserved for the environment
    std::string source_path;

    // Per-splat labels, filled by merge_clouds for composed scenes. Empty
    // means every splat carries `object_id`.
    std::vector<int> splat_object_ids;

    size_t size() const { return splats.size(); }
    bool empty() const { return splats.empty(); }
    int object_id_of(size_t i) const {
        return splat_object_ids.empty() ? object_id : splat_object_ids[i];
    }
};

// Sigma = R * S * S^T * R^T with S = diag(scale). The result is symmetric
// (bitwise) and positive semidefinite. Throws InvalidAssetError on
// non-finite input.
Mat3 covariance_of(const Gaussian& g);

// Checks the documented invariants (finiteness, unit quaternion, positive
// scales, opacity range). Throws InvalidAssetError naming the first offense.
void validate_cloud(const GaussianCloud& cloud);

// Binary little-endian PLY in the layout produced by 3DGS training runs:
// one `vertex` element, float32 properties
//   x y z nx ny nz f_dc_0..2 f_rest_0..44 opacity scale_0..2 rot_0..3
// Stored opacity is pre-sigmoid, stored scale pre-exp, rot is an
// unnormalized (w,x,y,z) quaternion. Normals are read and discarded.
GaussianCloud load_splat_ply(const std::filesystem::path& path);

struct PlySaveStats {
    size_t clamped_opacities = 0; // opacities pushed into [1e-6, 1-1e-6] before logit
};

// Inverse of load_splat_ply on decoded values: logit(opacity), log(scale).
PlySaveStats save_splat_ply(const GaussianCloud& cloud, const std::filesystem::path& path);

enum class TestAssetKind { Sphere, Box, Plane };

struct TestAssetParams {
    int count = 1000;
    // Sphere: extent.x() is the radius. Box: full edge lengths. Plane: x/y
    // side lengths, splats at z = 0.
    Vec3 extent = Vec3(0.05, 0.05, 0.05);
    Vec3 color = Vec3(0.8, 0.8, 0.8); // encoded into SH band 0 only
    double opacity = 0.9;
};

// Procedural ground-truth asset: splat means lie exactly on the requested
// surface, per-splat scale is 0.7x the mean nearest-neighbor spacing,
// deterministic for a given seed.
GaussianCloud generate_test_asset(TestAssetKind kind, const TestAssetParams& params,
                                  uint64_t seed);

} // namespace splatgen
