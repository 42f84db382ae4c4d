#pragma once

#include <Eigen/Dense>

#include "acdc/errors.hpp"

namespace acdc {

/// Largest real part over the spectrum of A.
double spectral_abscissa(const Eigen::MatrixXd& A);

/// PBH tests with tolerance 1e-8 on modes with Re >= -1e-8.
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Solve A' X + X A + W = 0 for symmetric W via the Kronecker linear
/// system with a dense LU. Bounded to n <= 200 states.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W);

struct CareResult {
    Eigen::MatrixXd X;
    double residual = 0;           // Frobenius norm of A'X + XA - XSX + Q
    double relative_residual = 0;  // residual / (|Q| + |X|^2 |S|)
    int newton_steps = 0;
};

/// Solve A' X + X A - X B R^{-1} B' X + Q = 0 for the stabilizing X >= 0.
/// Checks stabilizability of (A, B) and detectability of (A, Q) by PBH
/// first, extracts the stable invariant subspace of the Hamiltonian, then
/// polishes with Newton iterations (each a Lyapunov solve). Throws
/// NotStabilizable / NotDetectable / ResidualTooLarge. With zero inputs
/// (B has no columns) this degenerates to a Lyapunov solve and requires A
/// Hurwitz.
CareResult solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// LQR feedback K = -R^{-1} B' X for a CARE solution X.
Eigen::MatrixXd care_gain(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& R);

/// H2 norm of  xdot = A x + F w,  z = C x : sqrt(trace(F' X F)) with
/// A' X + X A + C' C = 0. Throws NotHurwitz when A is not stable.
double h2_norm(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
               const Eigen::MatrixXd& F);

}  // namespace acdc
