#include "normal_modes.hpp"

#include <cmath>

#include "scr/errors.hpp"

namespace scr::detail {

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& matrix) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
    if (solver.info() != Eigen::Success) {
        throw InvalidParameter("eigen-decomposition failed");
    }
    const auto& values = solver.eigenvalues();
    if (values.minCoeff() <= 0.0) {
        throw InvalidParameter("matrix is not positive definite");
    }
    return solver.eigenvectors() * values.cwiseSqrt().asDiagonal() *
           solver.eigenvectors().transpose();
}

void canonical_sign(Eigen::VectorXd& vector) {
    for (Eigen::Index i = 0; i < vector.size(); ++i) {
        if (std::abs(vector[i]) > 1e-12) {
            if (vector[i] < 0.0) {
                vector = -vector;
            }
            return;
        }
    }
}

Eigen::MatrixXd reduced_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
            "normal-mode matrices must be square and of equal size");
    const Eigen::MatrixXd root = spd_sqrt(a);
    Eigen::MatrixXd reduced = root * b * root;
    return 0.5 * (reduced + reduced.transpose());
}

std::vector<RawMode> solve_normal_modes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::MatrixXd reduced = reduced_matrix(a, b);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
    if (solver.info() != Eigen::Success) {
        throw ComputationError(ErrorKind::convergence, "symmetric eigen-solve did not converge");
    }

    std::vector<RawMode> modes;
    modes.reserve(static_cast<std::size_t>(reduced.rows()));
    for (Eigen::Index k = 0; k < reduced.rows(); ++k) {
        RawMode mode;
        mode.omega_sq = solver.eigenvalues()[k];
        mode.vector = solver.eigenvectors().col(k).normalized();
        canonical_sign(mode.vector);
        modes.push_back(std::move(mode));
    }
    return modes;
}

}  // namespace scr::detail
