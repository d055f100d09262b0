#pragma once

#include "splatgen/common.hpp"

namespace splatgen {

// Real spherical harmonics, degree <= 3, in the splatting convention:
// band-major ordering, m = -l..l, with the constants used by trained splat
// assets (C0 = 0.28209479177387814, ...).
inline constexpr int kShBands = 4;
inline constexpr int kShCoeffCount = 16; // 1 + 3 + 5 + 7

using ShVec = Eigen::Matrix<double, kShCoeffCount, 1>;

// Basis values Y_0..Y_15 at a unit direction. No normalization is applied;
// callers must pass a unit vector.
ShVec sh_basis(const Vec3& unit_dir);

// Sum_k coeffs[k] * Y_k(dir). Throws PreconditionError unless |dir| = 1
// within 1e-9.
double eval_sh(const ShVec& coeffs, const Vec3& dir);

// Block-diagonal rotation operator acting on SH coefficient vectors, one
// orthogonal block per band. Band 0 is the identity scalar and is not stored.
// A default-constructed value is the exact identity.
struct ShRotation {
    Mat3 band1 = Mat3::Identity();
    Eigen::Matrix<double, 5, 5> band2 = Eigen::Matrix<double, 5, 5>::Identity();
    Eigen::Matrix<double, 7, 7> band3 = Eigen::Matrix<double, 7, 7>::Identity();
};

// Builds the operator satisfying, for every coefficient vector c and unit d:
//   eval_sh(rotate_sh(c, sh_rotation_from(R)), d) == eval_sh(c, R^T d)
// R must be a rotation matrix (R^T R = I and det R = +1, both within 1e-9).
ShRotation sh_rotation_from(const Mat3& rotation);

// Applies the operator band-wise (slices 0; 1-3; 4-8; 9-15). Preserves the
// per-band Euclidean norm.
ShVec rotate_sh(const ShVec& coeffs, const ShRotation& op);

} // namespace splatgen
