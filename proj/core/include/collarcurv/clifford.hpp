#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace collarcurv {

/// Matrix model of the twisted curvature endomorphism data: anticommuting
/// generators squaring to -1 (standard tensor-product construction from
/// 2x2 blocks, even n <= 6, module size 2^{n/2}) plus skew-Hermitian
/// curvature samples R(f_i, f_j) of an auxiliary rank.
struct CliffordSetup {
    int n = 2;
    int rank = 1;
    std::vector<Eigen::MatrixXcd> gens;           // f_1..f_n
    std::vector<std::vector<Eigen::MatrixXcd>> R; // R[i][j] for i < j, rank x rank

    static CliffordSetup random(int n, int rank, std::uint64_t seed);
    /// Extremal n = 2, rank 1 sample: R(f_1, f_2) = i rho. The curvature
    /// endomorphism has eigenvalues {+rho, -rho}, meeting the spectral
    /// bound with equality.
    static CliffordSetup sharp_pair(double rho);

    /// Worst violation of the generator relations f_i f_j + f_j f_i =
    /// -2 delta_ij and of skew-Hermitianity of the curvature samples.
    double relation_residual() const;
    std::size_t module_dim() const { return gens.empty() ? 0 : gens[0].rows(); }
};

/// Sum over i < j of (f_i f_j) tensor R(f_i, f_j); Hermitian.
Eigen::MatrixXcd curvature_endomorphism(const CliffordSetup& s);

/// Operator norm of the curvature: max over orthonormal pairs (u, v) and
/// unit e of |R(u ^ v) e|. Basis pairs seed the search; projected-ascent
/// restarts refine it. Undershooting only makes the spectral check harder,
/// never wrongly passes it.
double curvature_operator_norm(const CliffordSetup& s, int restarts = 32,
                               std::uint64_t seed = 2024);

struct SpectralBoundCheck {
    double max_abs_eig = 0.0;
    double bound = 0.0;  // n(n-1)/2 * |R|
    bool pass = false;
};

SpectralBoundCheck spectral_bound_check(const CliffordSetup& s, int restarts = 32,
                                        std::uint64_t seed = 2024);

enum class CurvatureVerdict { Definite, Semidefinite, BelowThreshold };

/// Scalar-curvature threshold for positivity of scal/4 + curvature
/// endomorphism: semidefinite when scal_min >= 2 n (n-1) |R|, definite when
/// strict.
CurvatureVerdict curvature_threshold(double scal_min, int n, double normR);

/// Smallest eigenvalue of (scal_min / 4) I + curvature endomorphism;
/// cross-validates the threshold verdict on explicit samples.
double threshold_min_eigenvalue(const CliffordSetup& s, double scal_min);

} // namespace collarcurv
