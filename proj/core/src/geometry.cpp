#include "collarcurv/geometry.hpp"

#include <cmath>
#include <numeric>

#include "collarcurv/errors.hpp"

namespace collarcurv {

namespace {

/// Node indexing helper for the periodic grid: row-major over axes.
struct TorusGrid {
    const std::vector<int>& res;
    std::vector<std::size_t> strides;

    explicit TorusGrid(const std::vector<int>& r) : res(r) {
        strides.assign(res.size(), 1);
        for (std::size_t a = res.size(); a-- > 1;)
            strides[a - 1] = strides[a] * static_cast<std::size_t>(res[a]);
    }
    std::size_t size() const {
        std::size_t n = 1;
        for (int r : res) n *= static_cast<std::size_t>(r);
        return n;
    }
    std::size_t shift(std::size_t node, std::size_t axis, int delta) const {
        std::size_t idx = (node / strides[axis]) % static_cast<std::size_t>(res[axis]);
        int ni = (static_cast<int>(idx) + delta) % res[axis];
        if (ni < 0) ni += res[axis];
        return node + (static_cast<std::size_t>(ni) - idx) * strides[axis];
    }
};

} // namespace

BoundaryGeometry BoundaryGeometry::round_sphere(int dim) {
    if (dim < 1) throw PreconditionError("round sphere: boundary dimension must be >= 1");
    BoundaryGeometry g;
    g.kind_ = Kind::RoundSphere;
    g.dim_ = dim;
    return g;
}

BoundaryGeometry BoundaryGeometry::flat_torus(std::vector<double> periods,
                                              std::vector<int> resolution) {
    if (periods.empty() || periods.size() != resolution.size())
        throw PreconditionError("flat torus: periods/resolution size mismatch");
    for (double L : periods)
        if (L <= 0) throw PreconditionError("flat torus: periods must be positive");
    for (int r : resolution)
        if (r < 8) throw PreconditionError("flat torus: grid resolution must be >= 8 per axis");
    BoundaryGeometry g;
    g.kind_ = Kind::FlatTorus;
    g.dim_ = static_cast<int>(periods.size());
    g.periods_ = std::move(periods);
    g.resolution_ = std::move(resolution);
    return g;
}

std::size_t BoundaryGeometry::node_count() const {
    if (kind_ == Kind::RoundSphere) return 1;
    return TorusGrid(resolution_).size();
}

bool BoundaryGeometry::compatible_field(const SymTensorField& f) const {
    if (f.dim() != dim_) return false;
    if (kind_ == Kind::RoundSphere) return f.is_isotropic();
    return f.nodes() == 1 || f.nodes() == node_count();
}

void BoundaryGeometry::require_compatible(const SymTensorField& f) const {
    if (!compatible_field(f))
        throw PreconditionError(
            kind_ == Kind::RoundSphere
                ? "round-sphere boundary accepts only isotropic tensor fields"
                : "tensor field does not match the torus grid");
}

std::vector<double> BoundaryGeometry::intrinsic_scal(const SymTensorField& slice) const {
    require_compatible(slice);
    if (kind_ == Kind::RoundSphere) {
        const double c = slice.iso_scale();
        if (c <= 0) throw PreconditionError("intrinsic curvature: slice not positive definite");
        return {static_cast<double>(dim_) * static_cast<double>(dim_ - 1) / c};
    }

    // Flat torus: centered differences. Constant-coefficient fields are flat.
    if (slice.is_isotropic()) return std::vector<double>(node_count(), 0.0);

    TorusGrid grid(resolution_);
    const std::size_t N = grid.size();
    const int d = dim_;
    std::vector<double> h(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) h[a] = periods_[a] / resolution_[a];

    // dg[a][node] = centered difference of the slice along axis a
    std::vector<std::vector<Eigen::MatrixXd>> dg(d);
    for (int a = 0; a < d; ++a) {
        dg[a].resize(N);
        for (std::size_t v = 0; v < N; ++v)
            dg[a][v] = (slice.at(grid.shift(v, a, +1)) - slice.at(grid.shift(v, a, -1))) /
                       (2.0 * h[a]);
    }

    // Christoffel symbols Gamma[k](i,j) per node
    std::vector<std::vector<Eigen::MatrixXd>> gamma(N);
    std::vector<Eigen::MatrixXd> ginv(N);
    for (std::size_t v = 0; v < N; ++v) {
        Eigen::MatrixXd G = slice.at(v);
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success)
            throw PreconditionError("intrinsic curvature: slice not positive definite");
        ginv[v] = llt.solve(Eigen::MatrixXd::Identity(d, d));
        gamma[v].assign(d, Eigen::MatrixXd::Zero(d, d));
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < d; ++l)
                        s += ginv[v](k, l) *
                             (dg[i][v](j, l) + dg[j][v](i, l) - dg[l][v](i, j));
                    gamma[v][k](i, j) = 0.5 * s;
                }
    }

    // scal = g^{ij} (d_k Gamma^k_{ij} - d_i Gamma^k_{kj}
    //               + Gamma^k_{kl} Gamma^l_{ij} - Gamma^k_{il} Gamma^l_{kj})
    std::vector<double> out(N);
    for (std::size_t v = 0; v < N; ++v) {
        double scal = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double term = 0.0;
                for (int k = 0; k < d; ++k) {
                    const auto& gp = gamma[grid.shift(v, k, +1)];
                    const auto& gm = gamma[grid.shift(v, k, -1)];
                    term += (gp[k](i, j) - gm[k](i, j)) / (2.0 * h[k]);
                }
                for (int k = 0; k < d; ++k) {
                    const auto& gp = gamma[grid.shift(v, i, +1)];
                    const auto& gm = gamma[grid.shift(v, i, -1)];
                    term -= (gp[k](k, j) - gm[k](k, j)) / (2.0 * h[i]);
                }
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l)
                        term += gamma[v][k](k, l) * gamma[v][l](i, j) -
                                gamma[v][k](i, l) * gamma[v][l](k, j);
                scal += ginv[v](i, j) * term;
            }
        out[v] = scal;
    }
    return out;
}

double BoundaryGeometry::spatial_gradient_norm(const SymTensorField& f) const {
    require_compatible(f);
    if (kind_ == Kind::RoundSphere || f.is_isotropic()) return 0.0;
    TorusGrid grid(resolution_);
    const std::size_t N = grid.size();
    double worst = 0.0;
    for (std::size_t v = 0; v < N; ++v) {
        double acc = 0.0;
        for (int a = 0; a < dim_; ++a) {
            double h = periods_[a] / resolution_[a];
            Eigen::MatrixXd d =
                (f.at(grid.shift(v, a, +1)) - f.at(grid.shift(v, a, -1))) / (2.0 * h);
            acc += d.squaredNorm();
        }
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

bool BoundaryGeometry::operator==(const BoundaryGeometry& o) const {
    return kind_ == o.kind_ && dim_ == o.dim_ && periods_ == o.periods_ &&
           resolution_ == o.resolution_;
}

nlohmann::json BoundaryGeometry::to_json() const {
    if (kind_ == Kind::RoundSphere) return {{"kind", "round-sphere"}, {"dim", dim_}};
    return {{"kind", "flat-torus"},
            {"dim", dim_},
            {"periods", periods_},
            {"resolution", resolution_}};
}

BoundaryGeometry BoundaryGeometry::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "round-sphere") return round_sphere(j.at("dim").get<int>());
    if (kind == "flat-torus")
        return flat_torus(j.at("periods").get<std::vector<double>>(),
                          j.at("resolution").get<std::vector<int>>());
    throw PreconditionError("unknown boundary geometry kind: " + kind);
}

std::vector<double> BoundaryGeometry::node_coords(std::size_t node) const {
    if (kind_ == Kind::RoundSphere) return {};
    TorusGrid grid(resolution_);
    std::vector<double> x(static_cast<std::size_t>(dim_));
    for (int a = 0; a < dim_; ++a) {
        std::size_t idx = (node / grid.strides[a]) % static_cast<std::size_t>(resolution_[a]);
        x[a] = periods_[a] * static_cast<double>(idx) / resolution_[a];
    }
    return x;
}

} // namespace collarcurv
