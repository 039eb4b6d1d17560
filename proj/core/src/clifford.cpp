#include "collarcurv/clifford.hpp"

#include <cmath>
#include <complex>

#include "collarcurv/errors.hpp"
#include "collarcurv/rng.hpp"

namespace collarcurv {

namespace {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Standard generators: f_{2k-1} = s3^(k-1) (x) (i s1) (x) I...,
/// f_{2k} = s3^(k-1) (x) (i s2) (x) I...; each squares to -1 and they
/// anticommute pairwise.
std::vector<Mat> standard_generators(int n) {
    if (n < 2 || n % 2 != 0 || n > 6)
        throw PreconditionError("clifford: need even dimension 2 <= n <= 6");
    const int half = n / 2;
    Mat s1(2, 2), s2(2, 2), s3(2, 2), id2 = Mat::Identity(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, Cplx(0, -1), Cplx(0, 1), 0;
    s3 << 1, 0, 0, -1;
    const Cplx I(0, 1);

    std::vector<Mat> gens;
    for (int k = 0; k < half; ++k) {
        for (const Mat* blk : {&s1, &s2}) {
            Mat acc = Mat::Identity(1, 1);
            for (int j = 0; j < half; ++j) {
                const Mat& factor = (j < k) ? s3 : (j == k ? *blk : id2);
                acc = kron(acc, factor);
            }
            gens.push_back(I * acc);
        }
    }
    return gens;
}

Mat random_skew_hermitian(int rank, SplitMix64& rng) {
    Mat a(rank, rank);
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j)
            a(i, j) = Cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    return 0.5 * (a - a.adjoint().eval());
}

/// Curvature applied to a 2-plane: sum over i < j of (u_i v_j - u_j v_i)
/// R[i][j].
Mat plane_curvature(const CliffordSetup& s, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v) {
    Mat out = Mat::Zero(s.rank, s.rank);
    for (int i = 0; i < s.n; ++i)
        for (int j = i + 1; j < s.n; ++j) out += (u(i) * v(j) - u(j) * v(i)) * s.R[i][j];
    return out;
}

double sigma_max(const Mat& m, Eigen::VectorXcd* left = nullptr,
                 Eigen::VectorXcd* right = nullptr) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (left) *left = svd.matrixU().col(0);
    if (right) *right = svd.matrixV().col(0);
    return svd.singularValues()(0);
}

} // namespace

CliffordSetup CliffordSetup::random(int n, int rank, std::uint64_t seed) {
    if (rank < 1) throw PreconditionError("clifford: rank must be >= 1");
    CliffordSetup s;
    s.n = n;
    s.rank = rank;
    s.gens = standard_generators(n);
    SplitMix64 rng(seed);
    s.R.assign(n, std::vector<Mat>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            s.R[i][j] = random_skew_hermitian(rank, rng);
            s.R[j][i] = -s.R[i][j];
        }
    return s;
}

CliffordSetup CliffordSetup::sharp_pair(double rho) {
    CliffordSetup s;
    s.n = 2;
    s.rank = 1;
    s.gens = standard_generators(2);
    s.R.assign(2, std::vector<Mat>(2));
    Mat r(1, 1);
    r(0, 0) = Cplx(0, rho);
    s.R[0][1] = r;
    s.R[1][0] = -r;
    return s;
}

double CliffordSetup::relation_residual() const {
    const std::size_t d = module_dim();
    Mat id = Mat::Identity(d, d);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Mat anti = gens[i] * gens[j] + gens[j] * gens[i];
            Mat expect = (i == j) ? Mat(-2.0 * id) : Mat(Mat::Zero(d, d));
            worst = std::max(worst, (anti - expect).cwiseAbs().maxCoeff());
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            worst = std::max(worst, (R[i][j] + R[i][j].adjoint()).cwiseAbs().maxCoeff());
            worst = std::max(worst, (R[j][i] + R[i][j]).cwiseAbs().maxCoeff());
        }
    return worst;
}

Eigen::MatrixXcd curvature_endomorphism(const CliffordSetup& s) {
    if (s.relation_residual() > 1e-12)
        throw PreconditionError("clifford: representation relations violated");
    const std::size_t d = s.module_dim();
    Mat out = Mat::Zero(d * s.rank, d * s.rank);
    for (int i = 0; i < s.n; ++i)
        for (int j = i + 1; j < s.n; ++j) out += kron(s.gens[i] * s.gens[j], s.R[i][j]);
    return out;
}

double curvature_operator_norm(const CliffordSetup& s, int restarts, std::uint64_t seed) {
    double best = 0.0;
    // certified lower bound from the coordinate planes
    Eigen::VectorXd u = Eigen::VectorXd::Zero(s.n), v = Eigen::VectorXd::Zero(s.n);
    for (int i = 0; i < s.n; ++i)
        for (int j = i + 1; j < s.n; ++j) {
            u.setZero();
            v.setZero();
            u(i) = 1.0;
            v(j) = 1.0;
            best = std::max(best, sigma_max(plane_curvature(s, u, v)));
        }
    if (s.n == 2) return best;  // single plane: exact

    // projected ascent over orthonormal pairs
    SplitMix64 rng(seed);
    for (int trial = 0; trial < restarts; ++trial) {
        for (int i = 0; i < s.n; ++i) {
            u(i) = rng.uniform(-1.0, 1.0);
            v(i) = rng.uniform(-1.0, 1.0);
        }
        u.normalize();
        v -= u * u.dot(v);
        if (v.norm() < 1e-12) continue;
        v.normalize();

        double val = 0.0;
        double step = 0.5;
        for (int it = 0; it < 120; ++it) {
            Eigen::VectorXcd x, y;
            val = sigma_max(plane_curvature(s, u, v), &x, &y);
            // gradient of Re x* R(u^v) y in the plane coordinates
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s.n, s.n);
            for (int i = 0; i < s.n; ++i)
                for (int j = i + 1; j < s.n; ++j) {
                    double g = (x.adjoint() * s.R[i][j] * y)(0, 0).real();
                    G(i, j) = g;
                    G(j, i) = -g;
                }
            Eigen::VectorXd gu = G * v, gv = -(G * u);
            // retract a trial step to an orthonormal pair
            Eigen::VectorXd nu = (u + step * gu).normalized();
            Eigen::VectorXd nv = v + step * gv;
            nv -= nu * nu.dot(nv);
            if (nv.norm() < 1e-14) break;
            nv.normalize();
            double nval = sigma_max(plane_curvature(s, nu, nv));
            if (nval > val + 1e-15) {
                u = nu;
                v = nv;
            } else {
                step *= 0.5;
                if (step < 1e-10) break;
            }
        }
        best = std::max(best, val);
    }
    return best;
}

SpectralBoundCheck spectral_bound_check(const CliffordSetup& s, int restarts,
                                        std::uint64_t seed) {
    SpectralBoundCheck out;
    Eigen::SelfAdjointEigenSolver<Mat> es(curvature_endomorphism(s),
                                          Eigen::EigenvaluesOnly);
    out.max_abs_eig = es.eigenvalues().cwiseAbs().maxCoeff();
    double normR = curvature_operator_norm(s, restarts, seed);
    out.bound = 0.5 * s.n * (s.n - 1) * normR;
    out.pass = out.max_abs_eig <= out.bound + 1e-9;
    return out;
}

CurvatureVerdict curvature_threshold(double scal_min, int n, double normR) {
    double needed = 2.0 * n * (n - 1) * normR;
    if (scal_min > needed) return CurvatureVerdict::Definite;
    if (scal_min >= needed) return CurvatureVerdict::Semidefinite;
    return CurvatureVerdict::BelowThreshold;
}

double threshold_min_eigenvalue(const CliffordSetup& s, double scal_min) {
    Mat ke = curvature_endomorphism(s);
    Mat m = ke + (scal_min / 4.0) * Mat::Identity(ke.rows(), ke.cols());
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace collarcurv
