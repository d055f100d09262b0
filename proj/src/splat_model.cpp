#include "splatgen/splat_model.hpp"

#include "splatgen/rng.hpp"
#include "point_grid.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace splatgen {

namespace {

static_assert(std::endian::native == std::endian::little,
              "splat PLY I/O assumes a little-endian host");

constexpr int kPropertyCount = 62; // 3 + 3 + 3 + 45 + 1 + 3 + 4
constexpr double kShC0 = 0.28209479177387814;

std::array<std::string, kPropertyCount> expected_properties() {
    std::array<std::string, kPropertyCount> names;
    int i = 0;
    for (const char* n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"}) {
        names[i++] = n;
    }
    for (int k = 0; k < 45; ++k) names[i++] = "f_rest_" + std::to_string(k);
    names[i++] = "opacity";
    for (int k = 0; k < 3; ++k) names[i++] = "scale_" + std::to_string(k);
    for (int k = 0; k < 4; ++k) names[i++] = "rot_" + std::to_string(k);
    return names;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

void require_finite(double v, const std::string& prop, size_t splat,
                    const std::filesystem::path& path) {
    if (!std::isfinite(v)) {
        throw InvalidAssetError(path.string() + ": non-finite decoded value for property '" +
                                prop + "' at vertex " + std::to_string(splat));
    }
}

} // namespace

Mat3 covariance_of(const Gaussian& g) {
    if (!is_finite(g.scale) || !is_finite(g.orientation)) {
        throw InvalidAssetError("covariance_of: non-finite scale or orientation");
    }
    Mat3 r = g.orientation.normalized().toRotationMatrix();
    Mat3 rs = r * g.scale.asDiagonal();
    Mat3 m = rs * rs.transpose();
    return 0.5 * (m + m.transpose()); // exactly symmetric

}

void validate_cloud(const GaussianCloud& cloud) {
    for (size_t i = 0; i < cloud.splats.size(); ++i) {
        const Gaussian& g = cloud.splats[i];
        auto fail = [&](const char* what) {
            throw InvalidAssetError("splat " + std::to_string(i) + ": " + what);
        };
        if (!is_finite(g.mean)) fail("non-finite mean");
        if (!is_finite(g.scale) || (g.scale.array() <= 0.0).any()) {
            fail("scale components must be strictly positive and finite");
        }
        if (!is_finite(g.orientation) || std::abs(g.orientation.norm() - 1.0) > 1e-6) {
            fail("orientation must be a unit quaternion");
        }
        if (!std::isfinite(g.opacity) || g.opacity < 0.0 || g.opacity > 1.0) {
            fail("opacity must lie in [0, 1]");
        }
        if (!g.sh.allFinite()) fail("non-finite SH coefficients");
    }
    if (!cloud.splat_object_ids.empty() &&
        cloud.splat_object_ids.size() != cloud.splats.size()) {
        throw InvalidAssetError("per-splat object id count does not match splat count");
    }
}

GaussianCloud load_splat_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    auto next_line = [&]() -> std::string {
        if (!std::getline(in, line)) {
            throw InvalidAssetError(path.string() + ": truncated PLY header");
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") throw InvalidAssetError(path.string() + ": not a PLY file");
    size_t vertex_count = 0;
    bool have_format = false, have_element = false;
    std::vector<std::string> properties;
    while (true) {
        std::string l = next_line();
        if (l == "end_header") break;
        std::istringstream ls(l);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info") continue;
        if (tok == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt != "binary_little_endian") {
                throw InvalidAssetError(path.string() + ": unsupported PLY format '" + fmt +
                                        "' (binary_little_endian required)");
            }
            have_format = true;
        } else if (tok == "element") {
            std::string name;
            ls >> name >> vertex_count;
            if (name != "vertex") {
                throw InvalidAssetError(path.string() + ": unsupported element '" + name + "'");
            }
            if (have_element) {
                throw InvalidAssetError(path.string() + ": multiple vertex elements");
            }
            have_element = true;
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "float") {
                throw InvalidAssetError(path.string() + ": property '" + name +
                                        "' must have type float");
            }
            properties.push_back(name);
        } else {
            throw InvalidAssetError(path.string() + ": unexpected header token '" + tok + "'");
        }
    }
    if (!have_format || !have_element) {
        throw InvalidAssetError(path.string() + ": incomplete PLY header");
    }

    const auto expected = expected_properties();
    for (int i = 0; i < kPropertyCount; ++i) {
        if (i >= static_cast<int>(properties.size())) {
            throw InvalidAssetError(path.string() + ": missing property '" + expected[i] + "'");
        }
        if (properties[i] != expected[i]) {
            throw InvalidAssetError(path.string() + ": expected property '" + expected[i] +
                                    "' at index " + std::to_string(i) + ", found '" +
                                    properties[i] + "'");
        }
    }
    if (properties.size() != kPropertyCount) {
        throw InvalidAssetError(path.string() + ": unexpected extra property '" +
                                properties[kPropertyCount] + "'");
    }

    GaussianCloud cloud;
    cloud.source_path = path.string();
    cloud.splats.resize(vertex_count);
    std::vector<float> row(kPropertyCount);
    for (size_t s = 0; s < vertex_count; ++s) {
        in.read(reinterpret_cast<char*>(row.data()), kPropertyCount * sizeof(float));
        if (!in) {
            throw InvalidAssetError(path.string() + ": truncated vertex data at vertex " +
                                    std::to_string(s));
        }
        Gaussian& g = cloud.splats[s];
        g.mean = Vec3(row[0], row[1], row[2]);
        for (int a = 0; a < 3; ++a) require_finite(g.mean[a], expected[a], s, path);
        // normals row[3..5] are ignored
        for (int c = 0; c < 3; ++c) {
            g.sh(c, 0) = row[6 + c];
            require_finite(g.sh(c, 0), expected[6 + c], s, path);
        }
        // f_rest is channel-major: 15 coefficients for R, then G, then B.
        for (int c = 0; c < 3; ++c) {
            for (int k = 0; k < 15; ++k) {
                g.sh(c, k + 1) = row[9 + 15 * c + k];
                require_finite(g.sh(c, k + 1), expected[9 + 15 * c + k], s, path);
            }
        }
        require_finite(row[54], "opacity", s, path);
        g.opacity = sigmoid(row[54]);
        for (int a = 0; a < 3; ++a) {
            require_finite(row[55 + a], expected[55 + a], s, path);
            g.scale[a] = std::exp(static_cast<double>(row[55 + a]));
            require_finite(g.scale[a], expected[55 + a], s, path);
        }
        Eigen::Vector4d q(row[58], row[59], row[60], row[61]);
        for (int a = 0; a < 4; ++a) require_finite(q[a], expected[58 + a], s, path);
        double norm = q.norm();
        if (norm < 1e-12) {
            throw InvalidAssetError(path.string() + ": zero-norm quaternion at vertex " +
                                    std::to_string(s));
        }
        // Skip the division when the stored floats are already unit within
        // float-rounding distance; re-saving a loaded file then reproduces
        // its bytes exactly.
        if (std::abs(norm - 1.0) > 5e-7) q /= norm;
        g.orientation = Quat(q[0], q[1], q[2], q[3]); // (w, x, y, z)
    }
    return cloud;
}

PlySaveStats save_splat_ply(const GaussianCloud& cloud, const std::filesystem::path& path) {
    validate_cloud(cloud);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.splats.size() << "\n";
    for (const auto& name : expected_properties()) out << "property float " << name << "\n";
    out << "end_header\n";

    PlySaveStats stats;
    std::vector<float> row(kPropertyCount);
    for (const Gaussian& g : cloud.splats) {
        for (int a = 0; a < 3; ++a) row[a] = static_cast<float>(g.mean[a]);
        row[3] = row[4] = row[5] = 0.0f;
        for (int c = 0; c < 3; ++c) row[6 + c] = static_cast<float>(g.sh(c, 0));
        for (int c = 0; c < 3; ++c) {
            for (int k = 0; k < 15; ++k) {
                row[9 + 15 * c + k] = static_cast<float>(g.sh(c, k + 1));
            }
        }
        double op = g.opacity;
        if (op < 1e-6 || op > 1.0 - 1e-6) {
            op = std::clamp(op, 1e-6, 1.0 - 1e-6);
            ++stats.clamped_opacities;
        }
        row[54] = static_cast<float>(logit(op));
        for (int a = 0; a < 3; ++a) row[55 + a] = static_cast<float>(std::log(g.scale[a]));
        const Quat& q = g.orientation; // unit within 1e-6, checked by validate_cloud
        row[58] = static_cast<float>(q.w());
        row[59] = static_cast<float>(q.x());
        row[60] = static_cast<float>(q.y());
        row[61] = static_cast<float>(q.z());
        out.write(reinterpret_cast<const char*>(row.data()), kPropertyCount * sizeof(float));
    }
    if (!out) throw IoError("write failed: " + path.string());
    return stats;
}

GaussianCloud generate_test_asset(TestAssetKind kind, const TestAssetParams& params,
                                  uint64_t seed) {
    if ((params.extent.array() < 0.0).any()) {
        throw ConfigError("generate_test_asset: extent components must be non-negative");
    }
    if (params.count < 0) throw ConfigError("generate_test_asset: count must be >= 0");

    GaussianCloud cloud;
    if (params.count == 0) return cloud;
    cloud.splats.resize(static_cast<size_t>(params.count));

    Rng rng = derive_rng(seed, /*stream=*/0x7e57a55e7);
    std::vector<Vec3> means(cloud.splats.size());
    switch (kind) {
    case TestAssetKind::Sphere: {
        double radius = params.extent.x();
        for (Vec3& m : means) m = rng.unit_vector() * radius;
        break;
    }
    case TestAssetKind::Box: {
        Vec3 h = 0.5 * params.extent;
        // Faces weighted by area; face index pairs (axis, sign).
        double areas[3] = {params.extent.y() * params.extent.z(),
                           params.extent.x() * params.extent.z(),
                           params.extent.x() * params.extent.y()};
        double total = 2.0 * (areas[0] + areas[1] + areas[2]);
        if (total <= 0.0) throw ConfigError("generate_test_asset: box has zero surface area");
        for (Vec3& m : means) {
            double pick = rng.uniform(0.0, total);
            int axis = 0;
            double acc = 0.0;
            double sign = 1.0;
            for (int a = 0; a < 3; ++a) {
                if (pick < acc + 2.0 * areas[a]) {
                    axis = a;
                    sign = (pick - acc < areas[a]) ? -1.0 : 1.0;
                    break;
                }
                acc += 2.0 * areas[a];
            }
            Vec3 p;
            p[axis] = sign * h[axis];
            int u = (axis + 1) % 3, v = (axis + 2) % 3;
            p[u] = rng.uniform(-h[u], h[u]);
            p[v] = rng.uniform(-h[v], h[v]);
            m = p;
        }
        break;
    }
    case TestAssetKind::Plane: {
        Vec3 h = 0.5 * params.extent;
        for (Vec3& m : means) {
            m = Vec3(rng.uniform(-h.x(), h.x()), rng.uniform(-h.y(), h.y()), 0.0);
        }
        break;
    }
    }

    double spacing = mean_nn_spacing(means);
    if (spacing <= 0.0) spacing = std::max(params.extent.maxCoeff() * 0.1, 1e-4);
    double s = 0.7 * spacing;

    Vec3 band0 = (params.color - Vec3::Constant(0.5)) / kShC0;
    for (size_t i = 0; i < means.size(); ++i) {
        Gaussian& g = cloud.splats[i];
        g.mean = means[i];
        g.scale = Vec3::Constant(s);
        g.orientation = Quat::Identity();
        g.opacity = params.opacity;
        g.sh.setZero();
        g.sh.col(0) = band0;
    }
    return cloud;
}

} // namespace splatgen
