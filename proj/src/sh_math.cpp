#include "splatgen/sh_math.hpp"

#include <array>
#include <cmath>

namespace splatgen {

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};

constexpr int kBandOffset[kShBands] = {0, 1, 4, 9};
constexpr int kBandSize[kShBands] = {1, 3, 5, 7};

// Fixed evaluation directions per band, chosen so the per-band sample matrix
// is invertible. The rotation blocks are recovered by sampling: rotate the
// directions, evaluate the basis, solve against the precomputed inverse.
// That keeps the blocks consistent with sh_basis by construction, whatever
// sign convention the basis uses.
const std::array<Vec3, 3> kBand1Dirs = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};

const std::array<Vec3, 5> kBand2Dirs = {
    Vec3(0, 0, 1), Vec3(1, 1, 0).normalized(), Vec3(0, 1, 1).normalized(),
    Vec3(1, 0, 1).normalized(), Vec3(1, 0, 0)};

// Band 3 needs an asymmetric set: axis-aligned and diagonal directions make
// the odd-harmonic sample matrix exactly singular.
const std::array<Vec3, 7> kBand3Dirs = {
    Vec3(0, 0, 1),              Vec3(1, 0, 0),
    Vec3(0, 1, 0),              Vec3(1, 2, 0).normalized(),
    Vec3(2, 0, 1).normalized(), Vec3(0, 1, 2).normalized(),
    Vec3(1, 1, 1).normalized()};

template <int Band, size_t N>
Eigen::Matrix<double, N, N> sample_matrix(const std::array<Vec3, N>& dirs) {
    Eigen::Matrix<double, N, N> a;
    for (size_t i = 0; i < N; ++i) {
        ShVec basis = sh_basis(dirs[i]);
        for (size_t k = 0; k < N; ++k) {
            a(static_cast<int>(i), static_cast<int>(k)) =
                basis[kBandOffset[Band] + static_cast<int>(k)];
        }
    }
    return a;
}

template <int Band, size_t N>
Eigen::Matrix<double, N, N> solve_block(const Mat3& rotation, const std::array<Vec3, N>& dirs) {
    static const Eigen::Matrix<double, N, N> inv =
        sample_matrix<Band, N>(dirs).fullPivLu().inverse();
    Mat3 rt = rotation.transpose();
    Eigen::Matrix<double, N, N> b;
    for (size_t i = 0; i < N; ++i) {
        ShVec basis = sh_basis((rt * dirs[i]).eval());
        for (size_t k = 0; k < N; ++k) {
            b(static_cast<int>(i), static_cast<int>(k)) =
                basis[kBandOffset[Band] + static_cast<int>(k)];
        }
    }
    return inv * b;
}

} // namespace

ShVec sh_basis(const Vec3& d) {
    const double x = d.x(), y = d.y(), z = d.z();
    const double xx = x * x, yy = y * y, zz = z * z;
    ShVec out;
    out[0] = kC0;
    out[1] = -kC1 * y;
    out[2] = kC1 * z;
    out[3] = -kC1 * x;
    out[4] = kC2[0] * x * y;
    out[5] = kC2[1] * y * z;
    out[6] = kC2[2] * (2.0 * zz - xx - yy);
    out[7] = kC2[3] * x * z;
    out[8] = kC2[4] * (xx - yy);
    out[9] = kC3[0] * y * (3.0 * xx - yy);
    out[10] = kC3[1] * x * y * z;
    out[11] = kC3[2] * y * (4.0 * zz - xx - yy);
    out[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    out[13] = kC3[4] * x * (4.0 * zz - xx - yy);
    out[14] = kC3[5] * z * (xx - yy);
    out[15] = kC3[6] * x * (xx - 3.0 * yy);
    return out;
}

double eval_sh(const ShVec& coeffs, const Vec3& dir) {
    if (std::abs(dir.norm() - 1.0) > 1e-9) {
        throw PreconditionError("eval_sh: direction must be a unit vector");
    }
    return coeffs.dot(sh_basis(dir));
}

ShRotation sh_rotation_from(const Mat3& rotation) {
    if (!rotation.allFinite()) {
        throw PreconditionError("sh_rotation_from: non-finite rotation matrix");
    }
    const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).norm();
    if (ortho_err > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
        throw PreconditionError("sh_rotation_from: input is not a rotation matrix");
    }
    if (rotation == Mat3::Identity()) {
        return ShRotation{}; // exact identity blocks
    }
    ShRotation op;
    op.band1 = solve_block<1, 3>(rotation, kBand1Dirs);
    op.band2 = solve_block<2, 5>(rotation, kBand2Dirs);
    op.band3 = solve_block<3, 7>(rotation, kBand3Dirs);
    return op;
}

ShVec rotate_sh(const ShVec& coeffs, const ShRotation& op) {
    ShVec out;
    out[0] = coeffs[0];
    out.segment<3>(1) = op.band1 * coeffs.segment<3>(1);
    out.segment<5>(4) = op.band2 * coeffs.segment<5>(4);
    out.segment<7>(9) = op.band3 * coeffs.segment<7>(9);
    return out;
}

} // namespace splatgen
