#include "splatgen/splat_model.hpp"
#include "splatgen/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace splatgen;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "splatgen_test_splat_model";
    fs::create_directories(dir);
    return dir;
}

GaussianCloud random_cloud(size_t n, uint64_t seed) {
    Rng rng(seed);
    GaussianCloud cloud;
    cloud.splats.resize(n);
    for (Gaussian& g : cloud.splats) {
        g.mean = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        g.scale = Vec3(rng.uniform(0.01, 0.5), rng.uniform(0.01, 0.5), rng.uniform(0.01, 0.5));
        g.orientation = rng.random_rotation();
        g.opacity = rng.uniform(0.05, 0.95);
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < kShCoeffCount; ++k) g.sh(c, k) = rng.uniform(-1, 1);
    }
    return cloud;
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Write a raw splat PLY directly, independent of save_splat_ply, so loader
// decoding is exercised against hand-built bytes.
void write_raw_ply(const fs::path& p, size_t n, const std::vector<float>& rows,
                   int drop_property = -1) {
    std::ofstream out(p, std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex " << n << "\n";
    std::vector<std::string> names;
    for (const char* s : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"})
        names.push_back(s);
    for (int k = 0; k < 45; ++k) names.push_back("f_rest_" + std::to_string(k));
    names.push_back("opacity");
    for (int k = 0; k < 3; ++k) names.push_back("scale_" + std::to_string(k));
    for (int k = 0; k < 4; ++k) names.push_back("rot_" + std::to_string(k));
    for (int i = 0; i < static_cast<int>(names.size()); ++i) {
        if (i == drop_property) continue;
        out << "property float " << names[i] << "\n";
    }
    out << "end_header\n";
    out.write(reinterpret_cast<const char*>(rows.data()),
              static_cast<std::streamsize>(rows.size() * sizeof(float)));
}

std::vector<float> one_splat_row() {
    std::vector<float> row(62, 0.0f);
    row[0] = 1.0f; // x
    row[58] = 1.0f; // rot_0 = w
    return row;
}

} // namespace

TEST_SUITE("splat_model") {

TEST_CASE("covariance of identity orientation is diag(scale^2)") {
    Gaussian g;
    g.scale = Vec3(1, 2, 3);
    Mat3 cov = covariance_of(g);
    Mat3 expected = Vec3(1, 4, 9).asDiagonal();
    CHECK((cov - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("isotropic covariance is rotation invariant") {
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        Gaussian g;
        g.scale = Vec3(1, 1, 1);
        g.orientation = rng.random_rotation();
        CHECK((covariance_of(g) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("covariance for 90-degree rotation about z matches the matrix oracle") {
    Gaussian g;
    g.scale = Vec3(2, 1, 1);
    g.orientation = Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()));
    Mat3 cov = covariance_of(g);

    // Oracle: R * S * S^T * R^T with explicit matrices.
    Mat3 r = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()).toRotationMatrix();
    Mat3 s = Vec3(2, 1, 1).asDiagonal();
    Mat3 expected = r * s * s.transpose() * r.transpose();
    CHECK((cov - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cov - Mat3(Vec3(1, 4, 1).asDiagonal())).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("covariance is symmetric and its eigenvalues are scale^2") {
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        Gaussian g;
        g.scale = Vec3(rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3));
        g.orientation = rng.random_rotation();
        Mat3 cov = covariance_of(g);
        CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
        Vec3 expected = g.scale.cwiseProduct(g.scale);
        std::sort(expected.data(), expected.data() + 3);
        CHECK((es.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("covariance rejects non-finite input") {
    Gaussian g;
    g.scale = Vec3(1, std::nan(""), 1);
    CHECK_THROWS_AS(covariance_of(g), InvalidAssetError);
}

TEST_CASE("stored activations decode with sigmoid and exp") {
    fs::path p = temp_dir() / "one.ply";
    auto row = one_splat_row(); // opacity logit 0, scale logs 0
    write_raw_ply(p, 1, row);
    GaussianCloud c = load_splat_ply(p);
    REQUIRE(c.size() == 1);
    CHECK(c.splats[0].opacity == 0.5);           // sigmoid(0)
    CHECK(c.splats[0].scale == Vec3(1, 1, 1));   // exp(0)
    CHECK(c.splats[0].orientation.w() == 1.0);
    CHECK(c.splats[0].mean.x() == 1.0);
    validate_cloud(c);
}

TEST_CASE("missing property is reported by name") {
    fs::path p = temp_dir() / "missing.ply";
    write_raw_ply(p, 0, {}, /*drop_property=*/12); // f_rest_3
    CHECK_THROWS_WITH_AS(load_splat_ply(p), doctest::Contains("f_rest_3"), InvalidAssetError);
}

TEST_CASE("non-finite stored value is reported with the property name") {
    fs::path p = temp_dir() / "nan.ply";
    auto row = one_splat_row();
    row[55] = std::numeric_limits<float>::quiet_NaN(); // scale_0
    write_raw_ply(p, 1, row);
    CHECK_THROWS_WITH_AS(load_splat_ply(p), doctest::Contains("scale_0"), InvalidAssetError);
}

TEST_CASE("zero-norm quaternion is an invalid asset, not repaired") {
    fs::path p = temp_dir() / "zeroquat.ply";
    auto row = one_splat_row();
    row[58] = 0.0f;
    write_raw_ply(p, 1, row);
    CHECK_THROWS_WITH_AS(load_splat_ply(p), doctest::Contains("quaternion"), InvalidAssetError);
}

TEST_CASE("empty cloud round-trips as a valid zero-vertex PLY") {
    fs::path p = temp_dir() / "empty.ply";
    save_splat_ply(GaussianCloud{}, p);
    GaussianCloud c = load_splat_ply(p);
    CHECK(c.empty());
}

TEST_CASE("one-splat file declares 62 float properties") {
    fs::path p = temp_dir() / "count.ply";
    save_splat_ply(random_cloud(1, 3), p);
    std::ifstream in(p);
    std::string line;
    int props = 0;
    while (std::getline(in, line) && line != "end_header") {
        if (line.rfind("property float ", 0) == 0) ++props;
    }
    CHECK(props == 62);
}

TEST_CASE("save/load round-trip is the identity on decoded values") {
    fs::path p1 = temp_dir() / "rt1.ply";
    fs::path p2 = temp_dir() / "rt2.ply";
    GaussianCloud orig = random_cloud(64, 4);
    save_splat_ply(orig, p1);
    GaussianCloud loaded = load_splat_ply(p1);
    REQUIRE(loaded.size() == orig.size());
    for (size_t i = 0; i < orig.size(); ++i) {
        const Gaussian& a = orig.splats[i];
        const Gaussian& b = loaded.splats[i];
        for (int k = 0; k < 3; ++k) CHECK(b.mean[k] == static_cast<double>(static_cast<float>(a.mean[k])));
        CHECK(std::abs(b.opacity - a.opacity) < 1e-7);
        CHECK((b.scale - a.scale).cwiseAbs().maxCoeff() < 1e-7);
        CHECK(std::abs(b.orientation.angularDistance(a.orientation)) < 1e-6);
        CHECK((b.sh - a.sh.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);
    }

    // Second save is byte-identical: decoded values are a fixed point.
    save_splat_ply(loaded, p2);
    GaussianCloud again = load_splat_ply(p2);
    save_splat_ply(again, p1);
    CHECK(read_bytes(p1) == read_bytes(p2));
}

TEST_CASE("opacity at the extremes is clamped and counted") {
    GaussianCloud c = random_cloud(3, 5);
    c.splats[0].opacity = 0.0;
    c.splats[2].opacity = 1.0;
    fs::path p = temp_dir() / "clamp.ply";
    PlySaveStats stats = save_splat_ply(c, p);
    CHECK(stats.clamped_opacities == 2);
    GaussianCloud loaded = load_splat_ply(p);
    CHECK(loaded.splats[0].opacity == doctest::Approx(1e-6).epsilon(1e-3));
    CHECK(loaded.splats[2].opacity == doctest::Approx(1.0 - 1e-6).epsilon(1e-3));
}

TEST_CASE("sphere asset puts all means on the sphere") {
    TestAssetParams params;
    params.count = 1000;
    params.extent = Vec3(0.05, 0, 0);
    GaussianCloud c = generate_test_asset(TestAssetKind::Sphere, params, 42);
    REQUIRE(c.size() == 1000);
    for (const Gaussian& g : c.splats) {
        CHECK(std::abs(g.mean.norm() - 0.05) < 1e-9);
    }
}

TEST_CASE("same seed reproduces the asset bit-exactly") {
    TestAssetParams params;
    params.count = 500;
    params.extent = Vec3(0.05, 0.08, 0.03);
    GaussianCloud a = generate_test_asset(TestAssetKind::Box, params, 7);
    GaussianCloud b = generate_test_asset(TestAssetKind::Box, params, 7);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.splats[i].mean == b.splats[i].mean);
        CHECK(a.splats[i].scale == b.splats[i].scale);
    }
}

TEST_CASE("plane asset means sit exactly at z = 0") {
    TestAssetParams params;
    params.count = 400;
    params.extent = Vec3(1.0, 1.0, 0);
    GaussianCloud c = generate_test_asset(TestAssetKind::Plane, params, 9);
    double mean_z = 0;
    for (const Gaussian& g : c.splats) mean_z += g.mean.z();
    CHECK(mean_z / static_cast<double>(c.size()) == 0.0);
}

TEST_CASE("asset parameter errors") {
    TestAssetParams params;
    params.count = 0;
    CHECK(generate_test_asset(TestAssetKind::Sphere, params, 1).empty());
    params.count = 10;
    params.extent = Vec3(-1, 0, 0);
    CHECK_THROWS_AS(generate_test_asset(TestAssetKind::Sphere, params, 1), ConfigError);
}

TEST_CASE("asset SH encodes the base color in band 0 only") {
    TestAssetParams params;
    params.count = 32;
    params.extent = Vec3(0.05, 0, 0);
    params.color = Vec3(0.9, 0.4, 0.1);
    GaussianCloud c = generate_test_asset(TestAssetKind::Sphere, params, 11);
    const double c0 = 0.28209479177387814;
    for (const Gaussian& g : c.splats) {
        for (int ch = 0; ch < 3; ++ch) {
            CHECK(c0 * g.sh(ch, 0) + 0.5 == doctest::Approx(params.color[ch]).epsilon(1e-12));
            for (int k = 1; k < kShCoeffCount; ++k) CHECK(g.sh(ch, k) == 0.0);
        }
    }
}

} // TEST_SUITE
