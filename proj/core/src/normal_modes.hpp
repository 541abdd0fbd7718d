#pragma once

#include <vector>

#include <Eigen/Dense>

namespace scr::detail {

struct RawMode {
    double omega_sq = 0.0;
    Eigen::VectorXd vector;  // energy-normalised, unit length, canonical sign
};

/// Principal square root of a symmetric positive definite matrix.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& matrix);

/// Flips the vector so that its first entry above 1e-12 in magnitude is positive.
void canonical_sign(Eigen::VectorXd& vector);

/// The symmetric matrix A^1/2 B A^1/2 whose eigenvalues are omega^2.
Eigen::MatrixXd reduced_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Solves  omega^2 x = A B x  with A symmetric positive definite (inverse
/// inductance / inverse mass) and B symmetric (inverse capacitance / stiffness).
///
/// Reduces to the symmetric standard problem  A^1/2 B A^1/2 u = omega^2 u, so
/// the spectrum is real by construction. Returned vectors are u, sorted by
/// ascending omega^2.
std::vector<RawMode> solve_normal_modes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace scr::detail
