#include "splatgen/raster.hpp"

#include "splatgen/sh_math.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace splatgen {

namespace {

constexpr double kCovDilation = 0.3;   // px^2, screen-space
constexpr double kDetEpsilon = 1e-12;

struct PreparedSplat {
    int index = 0; // original splat index, breaks depth ties
    double u = 0, v = 0;
    double inv_a = 0, inv_b = 0, inv_c = 0; // inverse 2D covariance [a b; b c]
    double depth = 0;
    double opacity = 0;
    Vec3 color = Vec3::Zero();
    double bin_radius = 0;
    int object_id = 0;
};

Vec3 decode_color(const Gaussian& g, const Vec3& camera_center) {
    Vec3 dir = g.mean - camera_center;
    double n = dir.norm();
    dir = n > 1e-12 ? Vec3(dir / n) : Vec3(0, 0, 1);
    ShVec basis = sh_basis(dir);
    Vec3 c;
    for (int ch = 0; ch < 3; ++ch) {
        c[ch] = std::clamp(g.sh.row(ch).dot(basis.transpose()) + 0.5, 0.0, 1.0);
    }
    return c;
}

} // namespace

void validate_view(const CameraView& view) {
    if (view.width <= 0 || view.height <= 0) {
        throw PreconditionError("camera view: width and height must be positive");
    }
    if (!(view.fx > 0) || !(view.fy > 0)) {
        throw PreconditionError("camera view: focal lengths must be positive");
    }
    if (view.cx < 0 || view.cx >= view.width || view.cy < 0 || view.cy >= view.height) {
        throw PreconditionError("camera view: principal point must lie inside the image");
    }
    if (std::abs(view.world_to_camera.rotation.norm() - 1.0) > 1e-9 ||
        !is_finite(view.world_to_camera.translation)) {
        throw PreconditionError("camera view: invalid world_to_camera transform");
    }
}

std::optional<ProjectedGaussian> project_gaussian(const Gaussian& g, const CameraView& view,
                                                  double z_near) {
    const Vec3 t = view.world_to_camera.apply(g.mean);
    if (!(t.z() > z_near)) return std::nullopt;

    const double inv_z = 1.0 / t.z();
    const double u = view.fx * t.x() * inv_z + view.cx;
    const double v = view.fy * t.y() * inv_z + view.cy;

    Eigen::Matrix<double, 2, 3> jacobian;
    jacobian << view.fx * inv_z, 0.0, -view.fx * t.x() * inv_z * inv_z,
        0.0, view.fy * inv_z, -view.fy * t.y() * inv_z * inv_z;

    Eigen::Matrix<double, 2, 3> m = jacobian * view.world_to_camera.rotation_matrix();
    Mat2 cov2d = m * covariance_of(g) * m.transpose();
    cov2d(0, 0) += kCovDilation;
    cov2d(1, 1) += kCovDilation;

    const double mid = 0.5 * (cov2d(0, 0) + cov2d(1, 1));
    const double det = cov2d(0, 0) * cov2d(1, 1) - cov2d(0, 1) * cov2d(1, 0);
    const double disc = std::sqrt(std::max(mid * mid - det, 0.0));
    const double radius3 = 3.0 * std::sqrt(std::max(mid + disc, 0.0));
    if (u + radius3 < 0.0 || u - radius3 > view.width || v + radius3 < 0.0 ||
        v - radius3 > view.height) {
        return std::nullopt;
    }

    ProjectedGaussian out;
    out.center_px = Vec2(u, v);
    out.cov2d = cov2d;
    out.depth_cam = t.z();
    return out;
}

RenderOutput render(const GaussianCloud& cloud, const CameraView& view,
                    const RenderOptions& opts) {
    validate_view(view);
    const size_t n = cloud.size();
    const size_t pixels = static_cast<size_t>(view.width) * static_cast<size_t>(view.height);

    RenderOutput out;
    out.width = view.width;
    out.height = view.height;
    out.rgb.assign(pixels * 3, 0.0);
    out.depth.assign(pixels, 0.0);
    out.alpha.assign(pixels, 0.0);

    std::set<int> ids;
    for (size_t i = 0; i < n; ++i) ids.insert(cloud.object_id_of(i));
    for (int id : ids) out.object_weight.emplace(id, std::vector<double>(pixels, 0.0));

    // Projection pass: slot per splat keeps results in input order.
    const Vec3 cam_center = view.camera_center();
    std::vector<PreparedSplat> prepared(n);
    std::vector<uint8_t> state(n, 0); // 0 live, 1 culled, 2 singular, 3 sub-threshold
    const int workers = resolve_workers(opts.workers);
    const size_t chunk = 512;
    const size_t num_chunks = (n + chunk - 1) / chunk;
    parallel_for(num_chunks, workers, [&](size_t c) {
        size_t begin = c * chunk, end = std::min(n, begin + chunk);
        for (size_t i = begin; i < end; ++i) {
            const Gaussian& g = cloud.splats[i];
            auto proj = project_gaussian(g, view, opts.z_near);
            if (!proj) {
                state[i] = 1;
                continue;
            }
            const Mat2& cov = proj->cov2d;
            double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
            if (det < kDetEpsilon) {
                state[i] = 2;
                continue;
            }
            double floor_log = std::log(g.opacity / opts.alpha_floor);
            if (!(floor_log > 0.0)) {
                state[i] = 3; // can never reach the alpha floor
                continue;
            }
            PreparedSplat& p = prepared[i];
            p.index = static_cast<int>(i);
            p.u = proj->center_px.x();
            p.v = proj->center_px.y();
            double inv_det = 1.0 / det;
            p.inv_a = cov(1, 1) * inv_det;
            p.inv_b = -cov(0, 1) * inv_det;
            p.inv_c = cov(0, 0) * inv_det;
            p.depth = proj->depth_cam;
            p.opacity = g.opacity;
            p.color = decode_color(g, cam_center);
            double mid = 0.5 * (cov(0, 0) + cov(1, 1));
            double disc = std::sqrt(std::max(mid * mid - det, 0.0));
            // Radius beyond which opacity * exp(-q/2) falls under the alpha
            // floor in every direction; binning with it keeps tiled and
            // untiled blending pixel-for-pixel identical.
            p.bin_radius = std::sqrt(2.0 * floor_log * (mid + disc));
            p.object_id = cloud.object_id_of(i);
        }
    });
    for (size_t i = 0; i < n; ++i) {
        if (state[i] == 1) ++out.stats.splats_culled;
        if (state[i] == 2) ++out.stats.splats_skipped;
    }

    // Tile binning in splat order.
    const int tile = std::max(opts.tile_size, 1);
    const int tiles_x = (view.width + tile - 1) / tile;
    const int tiles_y = (view.height + tile - 1) / tile;
    std::vector<std::vector<int>> tile_splats(static_cast<size_t>(tiles_x) * tiles_y);
    for (size_t i = 0; i < n; ++i) {
        if (state[i] != 0) continue;
        const PreparedSplat& p = prepared[i];
        int x0 = std::max(0, static_cast<int>(std::floor((p.u - p.bin_radius) / tile)));
        int x1 = std::min(tiles_x - 1, static_cast<int>(std::floor((p.u + p.bin_radius) / tile)));
        int y0 = std::max(0, static_cast<int>(std::floor((p.v - p.bin_radius) / tile)));
        int y1 = std::min(tiles_y - 1, static_cast<int>(std::floor((p.v + p.bin_radius) / tile)));
        for (int ty = y0; ty <= y1; ++ty) {
            for (int tx = x0; tx <= x1; ++tx) {
                tile_splats[static_cast<size_t>(ty) * tiles_x + tx].push_back(
                    static_cast<int>(i));
            }
        }
    }
    for (const auto& list : tile_splats) {
        if (!list.empty()) ++out.stats.tiles_touched;
    }

    // Blend pass: each tile owns a disjoint pixel block.
    parallel_for(tile_splats.size(), workers, [&](size_t t) {
        std::vector<int> order = tile_splats[t];
        if (order.empty()) return;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (prepared[a].depth != prepared[b].depth) {
                return prepared[a].depth < prepared[b].depth;
            }
            return prepared[a].index < prepared[b].index;
        });

        const int tx = static_cast<int>(t) % tiles_x;
        const int ty = static_cast<int>(t) / tiles_x;
        const int col0 = tx * tile, col1 = std::min(view.width, col0 + tile);
        const int row0 = ty * tile, row1 = std::min(view.height, row0 + tile);
        for (int row = row0; row < row1; ++row) {
            for (int col = col0; col < col1; ++col) {
                const double px = col + 0.5, py = row + 0.5;
                double transmittance = 1.0;
                double r = 0, g = 0, b = 0, depth_sum = 0, alpha_sum = 0;
                const size_t pix = out.pixel_index(row, col);
                for (int si : order) {
                    const PreparedSplat& p = prepared[si];
                    const double dx = px - p.u, dy = py - p.v;
                    const double q = p.inv_a * dx * dx + 2.0 * p.inv_b * dx * dy +
                                     p.inv_c * dy * dy;
                    const double alpha_raw = p.opacity * std::exp(-0.5 * q);
                    if (alpha_raw < opts.alpha_floor) continue;
                    const double alpha = std::min(alpha_raw, opts.alpha_clamp);
                    const double w = alpha * transmittance;
                    r += p.color.x() * w;
                    g += p.color.y() * w;
                    b += p.color.z() * w;
                    depth_sum += p.depth * w;
                    alpha_sum += w;
                    out.object_weight.find(p.object_id)->second[pix] += w;
                    transmittance *= 1.0 - alpha;
                    if (transmittance < opts.transmittance_min) break;
                }
                out.rgb[pix * 3 + 0] = r;
                out.rgb[pix * 3 + 1] = g;
                out.rgb[pix * 3 + 2] = b;
                out.alpha[pix] = alpha_sum;
                out.depth[pix] = alpha_sum >= opts.background_alpha ? depth_sum / alpha_sum : 0.0;
            }
        }
    });

    return out;
}

std::vector<uint8_t> render_silhouette(const GaussianCloud& cloud, const CameraView& view,
                                       const RenderOptions& opts) {
    for (size_t i = 1; i < cloud.size(); ++i) {
        if (cloud.object_id_of(i) != cloud.object_id_of(0)) {
            throw PreconditionError("render_silhouette: cloud has mixed object ids");
        }
    }
    RenderOutput out = render(cloud, view, opts);
    std::vector<uint8_t> mask(out.alpha.size());
    for (size_t i = 0; i < mask.size(); ++i) mask[i] = out.alpha[i] >= 0.5 ? 1 : 0;
    return mask;
}

std::map<int, std::vector<uint8_t>> visibility_masks(const RenderOutput& output) {
    const size_t pixels = static_cast<size_t>(output.width) * output.height;
    std::map<int, std::vector<uint8_t>> masks;
    for (const auto& [id, plane] : output.object_weight) {
        masks.emplace(id, std::vector<uint8_t>(pixels, 0));
    }
    for (size_t p = 0; p < pixels; ++p) {
        if (output.alpha[p] < 0.5) continue;
        int best_id = 0;
        double best_w = -1.0;
        for (const auto& [id, plane] : output.object_weight) {
            if (plane[p] > best_w) { // strictly greater keeps the lower id on ties
                best_w = plane[p];
                best_id = id;
            }
        }
        if (best_w > 0.0) masks.find(best_id)->second[p] = 1;
    }
    return masks;
}

} // namespace splatgen
