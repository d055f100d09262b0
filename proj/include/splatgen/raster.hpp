#pragma once

#include "splatgen/compose.hpp"

#include <map>
#include <optional>
#include <vector>

namespace splatgen {

// Pinhole camera: u = fx * x/z + cx, v = fy * y/z + cy in camera space
// (x right, y down, z forward). Pixel (col, row) samples at
// (col + 0.5, row + 0.5).
struct CameraView {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;
    RigidTransform world_to_camera;

    Vec3 camera_center() const { return world_to_camera.inverse().translation; }
};

void validate_view(const CameraView& view);

struct RenderOptions {
    int tile_size = 16;
    double transmittance_min = 1e-4; // blending stops below this
    double alpha_floor = 1.0 / 255.0;
    double alpha_clamp = 0.99;
    double z_near = 0.01;             // meters
    double background_alpha = 0.5;    // depth is 0 below this accumulated alpha
    int workers = 0;                  // 0 = hardware concurrency
};

struct RenderStats {
    int64_t splats_culled = 0;   // behind the near plane or off-image
    int64_t splats_skipped = 0;  // singular 2D covariance
    int64_t tiles_touched = 0;   // tiles with at least one overlapping splat
};

struct RenderOutput {
    int width = 0, height = 0;
    std::vector<double> rgb;   // H*W*3, [0, 1]
    std::vector<double> depth; // H*W meters, 0 where alpha < background_alpha
    std::vector<double> alpha; // H*W, [0, 1]
    // Accumulated blend weight per object id, each plane H*W. Keys are the
    // object ids present in the cloud.
    std::map<int, std::vector<double>> object_weight;
    RenderStats stats;

    size_t pixel_index(int row, int col) const {
        return static_cast<size_t>(row) * static_cast<size_t>(width) + static_cast<size_t>(col);
    }
};

struct ProjectedGaussian {
    Vec2 center_px = Vec2::Zero();
    Mat2 cov2d = Mat2::Zero(); // includes the 0.3 px^2 dilation
    double depth_cam = 0;
};

// EWA projection of one Gaussian. Returns nullopt when the splat is culled:
// camera-space depth <= z_near or the 3-sigma extent misses the image.
std::optional<ProjectedGaussian> project_gaussian(const Gaussian& g, const CameraView& view,
                                                  double z_near = 0.01);

// Tile-based front-to-back alpha blending. Deterministic: identical inputs
// produce bit-identical buffers for any worker count.
RenderOutput render(const GaussianCloud& cloud, const CameraView& view,
                    const RenderOptions& opts = {});

// Amodal silhouette of a single-object cloud rendered alone:
// mask = alpha >= 0.5. Throws PreconditionError on mixed object ids.
std::vector<uint8_t> render_silhouette(const GaussianCloud& cloud, const CameraView& view,
                                       const RenderOptions& opts = {});

// Occlusion-aware per-object masks: a pixel belongs to the object with the
// largest accumulated weight (ties to the lower id, environment id 0
// competes too) where total alpha >= 0.5.
std::map<int, std::vector<uint8_t>> visibility_masks(const RenderOutput& output);

} // namespace splatgen
