#include "acdc/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace acdc {

namespace {

constexpr double kPbhTol = 1e-8;
constexpr int kMaxLyapunovDim = 200;

void require_symmetric(const Eigen::MatrixXd& M, const char* name) {
    if (M.rows() != M.cols())
        throw DimensionMismatch(std::string(name) + " must be symmetric");
    if (M.size() == 0) return;  // 0x0 is trivially symmetric
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1 + M.cwiseAbs().maxCoeff()))
        throw DimensionMismatch(std::string(name) + " must be symmetric");
}

}  // namespace

double spectral_abscissa(const Eigen::MatrixXd& A) {
    return A.eigenvalues().real().maxCoeff();
}

namespace {

// Rank form of the PBH test: at every closed-right-half-plane eigenvalue
// the pencil must keep full row (stabilizability) or column (detectability)
// rank. Testing eigenvectors one by one is not enough: a repeated
// eigenvalue can hide a deficient combination, e.g. a conserved quantity
// spread across several modes.
bool pbh_full_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& other,
                   bool stack_below) {
    const int n = static_cast<int>(A.rows());
    if (n == 0) return true;
    const double scale =
        std::max({1.0, A.cwiseAbs().maxCoeff(),
                  other.size() > 0 ? other.cwiseAbs().maxCoeff() : 0.0});
    const Eigen::VectorXcd eigs = A.eigenvalues();
    std::vector<std::complex<double>> checked;
    for (int i = 0; i < n; ++i) {
        const std::complex<double> lam = eigs(i);
        if (lam.real() < -kPbhTol) continue;
        bool seen = false;
        for (const auto& c : checked)
            if (std::abs(c - lam) <= 1e-9 * scale) seen = true;
        if (seen) continue;
        checked.push_back(lam);

        const Eigen::MatrixXcd shifted =
            A.cast<std::complex<double>>() -
            lam * Eigen::MatrixXcd::Identity(n, n);
        Eigen::MatrixXcd pencil;
        if (stack_below) {
            pencil.resize(n + other.rows(), n);
            pencil << shifted, other.cast<std::complex<double>>();
        } else {
            pencil.resize(n, n + other.cols());
            pencil << shifted, other.cast<std::complex<double>>();
        }
        const Eigen::VectorXd sv =
            Eigen::JacobiSVD<Eigen::MatrixXcd>(pencil).singularValues();
        if (sv(sv.size() - 1) <= kPbhTol * scale) return false;
    }
    return true;
}

}  // namespace

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    return pbh_full_rank(A, B, /*stack_below=*/false);
}

bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
    return pbh_full_rank(A, Q, /*stack_below=*/true);
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W) {
    const int n = static_cast<int>(A.rows());
    require_symmetric(W, "W");
    if (A.cols() != n || W.rows() != n)
        throw DimensionMismatch("lyapunov: A and W dimensions disagree");
    if (n > kMaxLyapunovDim)
        throw SizeLimit("lyapunov solve bounded to " + std::to_string(kMaxLyapunovDim) +
                        " states, got " + std::to_string(n));

    // vec(A'X) = (I (x) A') vec X,  vec(XA) = (A' (x) I) vec X  (column-major).
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                K(i + n * j, k + n * j) += A(k, i);  // A' X
                K(i + n * j, i + n * k) += A(k, j);  // X A
            }
        }
    Eigen::VectorXd w(Eigen::Map<const Eigen::VectorXd>(W.data(), n * n));
    Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(K).solve(-w);
    Eigen::MatrixXd X(Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n));
    return 0.5 * (X + X.transpose());
}

CareResult solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (A.cols() != n || B.rows() != n)
        throw DimensionMismatch("care: A and B dimensions disagree");
    require_symmetric(Q, "Q");
    require_symmetric(R, "R");
    if (Q.rows() != n || R.rows() != m)
        throw DimensionMismatch("care: Q or R dimension disagrees");

    if (m > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> res(R);
        if (res.eigenvalues().minCoeff() <= 1e-10)
            throw Error("care: R must be positive definite");
    }
    if (Q.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qes(Q);
        if (qes.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
            throw Error("care: Q must be positive semidefinite");
    }
    if (!is_stabilizable(A, B))
        throw NotStabilizable("care: (A, B) fails the PBH stabilizability test");
    if (!is_detectable(A, Q))
        throw NotDetectable("care: (A, Q) fails the PBH detectability test");

    Eigen::MatrixXd S = m > 0
                            ? Eigen::MatrixXd(B * R.llt().solve(B.transpose()))
                            : Eigen::MatrixXd::Zero(n, n);

    CareResult result;
    if (m == 0) {
        // No inputs: the CARE degenerates to A'X + XA + Q = 0.
        result.X = solve_lyapunov(A, Q);
    } else {
        // Stable invariant subspace of the Hamiltonian.
        Eigen::MatrixXd H(2 * n, 2 * n);
        H << A, -S, -Q, -A.transpose();
        Eigen::EigenSolver<Eigen::MatrixXd> es(H);
        Eigen::MatrixXcd basis(2 * n, n);
        int taken = 0;
        for (int i = 0; i < 2 * n && taken < n; ++i)
            if (es.eigenvalues()(i).real() < 0.0) basis.col(taken++) = es.eigenvectors().col(i);
        if (taken != n)
            throw ResidualTooLarge(
                "care: Hamiltonian stable subspace has dimension " +
                std::to_string(taken) + ", expected " + std::to_string(n));

        Eigen::MatrixXcd U1 = basis.topRows(n);
        Eigen::MatrixXcd U2 = basis.bottomRows(n);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(U1);
        if (!lu.isInvertible())
            throw ResidualTooLarge("care: stable subspace basis is singular");
        Eigen::MatrixXd X = (U2 * lu.inverse()).real();
        result.X = 0.5 * (X + X.transpose());
    }

    auto residual_of = [&](const Eigen::MatrixXd& X) {
        Eigen::MatrixXd res = A.transpose() * X + X * A - X * S * X + Q;
        return res.norm();
    };
    auto denom_of = [&](const Eigen::MatrixXd& X) {
        return std::max(1e-300, Q.norm() + X.norm() * X.norm() * S.norm());
    };

    // Newton (Kleinman) polish: each step solves a Lyapunov equation for
    // the closed loop at the current iterate. Quadratic convergence from a
    // stabilizing start.
    for (int it = 0; it < 25; ++it) {
        double rel = residual_of(result.X) / denom_of(result.X);
        if (rel <= 1e-13) break;
        Eigen::MatrixXd Acl = A - S * result.X;
        if (spectral_abscissa(Acl) >= 0 && m > 0) break;  // lost stabilizing iterate
        Eigen::MatrixXd W = Q + result.X * S * result.X;
        Eigen::MatrixXd next = solve_lyapunov(Acl, W);
        ++result.newton_steps;
        if (residual_of(next) >= residual_of(result.X)) break;  // converged to roundoff
        result.X = next;
    }

    result.residual = residual_of(result.X);
    result.relative_residual = result.residual / denom_of(result.X);
    if (result.relative_residual > 1e-9)
        throw ResidualTooLarge("care: relative residual " +
                               std::to_string(result.relative_residual) +
                               " exceeds 1e-9");
    if (m > 0 && spectral_abscissa(A - S * result.X) >= 0)
        throw ResidualTooLarge("care: computed X is not stabilizing");
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> xes(result.X);
        if (xes.eigenvalues().minCoeff() <
            -1e-8 * std::max(1.0, result.X.cwiseAbs().maxCoeff()))
            throw ResidualTooLarge("care: computed X is not positive semidefinite");
    }
    return result;
}

Eigen::MatrixXd care_gain(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& R) {
    if (B.cols() == 0) return Eigen::MatrixXd::Zero(0, X.rows());
    return -R.llt().solve(B.transpose() * X);
}

double h2_norm(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
               const Eigen::MatrixXd& F) {
    if (A.rows() == 0) return 0.0;
    double abscissa = spectral_abscissa(A);
    if (abscissa >= 0)
        throw NotHurwitz("h2 norm undefined: spectral abscissa " +
                         std::to_string(abscissa));
    Eigen::MatrixXd X = solve_lyapunov(A, Eigen::MatrixXd(C.transpose() * C));
    double sq = (F.transpose() * X * F).trace();
    return std::sqrt(std::max(0.0, sq));
}

}  // namespace acdc
