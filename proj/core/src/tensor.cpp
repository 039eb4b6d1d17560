#include "collarcurv/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "collarcurv/errors.hpp"

namespace collarcurv {

namespace tensor_ops {

double trace_in_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw PreconditionError("trace_against: metric not positive definite");
    return llt.solve(h).trace();
}

double norm_in_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw PreconditionError("tensor norm: metric not positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd hi = L.triangularView<Eigen::Lower>().solve(h);
    Eigen::MatrixXd m =
        L.triangularView<Eigen::Lower>().solve(hi.transpose()).transpose();
    return m.norm();
}

double min_eig_in_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw PreconditionError("tensor eigenvalue: metric not positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd hi = L.triangularView<Eigen::Lower>().solve(h);
    Eigen::MatrixXd m =
        L.triangularView<Eigen::Lower>().solve(hi.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace tensor_ops

SymTensorField SymTensorField::isotropic(int dim, double scale) {
    if (dim < 1) throw PreconditionError("tensor field: dim must be >= 1");
    SymTensorField f;
    f.iso_ = true;
    f.dim_ = dim;
    f.scale_ = scale;
    return f;
}

SymTensorField SymTensorField::grid(std::vector<Eigen::MatrixXd> values) {
    if (values.empty()) throw PreconditionError("tensor field: empty grid");
    const int d = static_cast<int>(values[0].rows());
    SymTensorField f;
    f.iso_ = false;
    f.dim_ = d;
    for (auto& m : values) {
        if (m.rows() != d || m.cols() != d)
            throw PreconditionError("tensor field: inconsistent matrix sizes");
        double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        if (asym > kAsymmetryTolerance)
            throw PreconditionError("tensor field: matrix asymmetry " + std::to_string(asym) +
                                    " exceeds 1e-9");
        m = 0.5 * (m + m.transpose().eval());
    }
    f.values_ = std::move(values);
    return f;
}

double SymTensorField::iso_scale() const {
    if (!iso_) throw std::logic_error("iso_scale on grid field");
    return scale_;
}

Eigen::MatrixXd SymTensorField::at(std::size_t node) const {
    if (iso_) return scale_ * Eigen::MatrixXd::Identity(dim_, dim_);
    return values_.at(node);
}

SymTensorField SymTensorField::scaled(double c) const {
    SymTensorField f = *this;
    if (iso_) {
        f.scale_ *= c;
    } else {
        for (auto& m : f.values_) m *= c;
    }
    return f;
}

SymTensorField SymTensorField::operator+(const SymTensorField& o) const {
    if (dim_ != o.dim_) throw PreconditionError("tensor field: dimension mismatch");
    if (iso_ && o.iso_) return isotropic(dim_, scale_ + o.scale_);
    std::size_t n = std::max(nodes(), o.nodes());
    if (nodes() != 1 && o.nodes() != 1 && nodes() != o.nodes())
        throw PreconditionError("tensor field: node count mismatch");
    std::vector<Eigen::MatrixXd> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = at(i % nodes()) + o.at(i % o.nodes());
    return grid(std::move(vals));
}

SymTensorField SymTensorField::operator-(const SymTensorField& o) const {
    return *this + o.scaled(-1.0);
}

bool SymTensorField::same_values(const SymTensorField& o, double tol) const {
    if (dim_ != o.dim_) return false;
    std::size_t n = std::max(nodes(), o.nodes());
    for (std::size_t i = 0; i < n; ++i) {
        double d = (at(i % nodes()) - o.at(i % o.nodes())).cwiseAbs().maxCoeff();
        if (d > tol) return false;
    }
    return true;
}

bool SymTensorField::positive_definite() const {
    if (iso_) return scale_ > 0.0;
    for (const auto& m : values_) {
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() != Eigen::Success) return false;
    }
    return true;
}

double SymTensorField::min_eigenvalue_against(const SymTensorField& g) const {
    if (iso_ && g.iso_) return scale_ / g.scale_;
    std::size_t n = std::max(nodes(), g.nodes());
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        worst = std::min(worst,
                         tensor_ops::min_eig_in_frame(g.at(i % g.nodes()), at(i % nodes())));
    return worst;
}

double SymTensorField::norm_against(const SymTensorField& g) const {
    if (iso_ && g.iso_)
        return std::abs(scale_ / g.scale_) * std::sqrt(static_cast<double>(dim_));
    std::size_t n = std::max(nodes(), g.nodes());
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst,
                         tensor_ops::norm_in_frame(g.at(i % g.nodes()), at(i % nodes())));
    return worst;
}

double SymTensorField::max_abs() const {
    if (iso_) return std::abs(scale_);
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

nlohmann::json SymTensorField::to_json() const {
    if (iso_) return {{"backend", "isotropic"}, {"dim", dim_}, {"scale", scale_}};
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& m : values_) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < dim_; ++i) {
            std::vector<double> row(dim_);
            for (int j = 0; j < dim_; ++j) row[j] = m(i, j);
            rows.push_back(row);
        }
        nodes.push_back(rows);
    }
    return {{"backend", "grid"}, {"dim", dim_}, {"nodes", nodes}};
}

SymTensorField SymTensorField::from_json(const nlohmann::json& j) {
    const std::string backend = j.at("backend").get<std::string>();
    const int dim = j.at("dim").get<int>();
    if (backend == "isotropic") return isotropic(dim, j.at("scale").get<double>());
    if (backend == "grid") {
        std::vector<Eigen::MatrixXd> vals;
        for (const auto& node : j.at("nodes")) {
            Eigen::MatrixXd m(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int k = 0; k < dim; ++k) m(i, k) = node.at(i).at(k).get<double>();
            vals.push_back(std::move(m));
        }
        return grid(std::move(vals));
    }
    throw PreconditionError("tensor field: unknown backend " + backend);
}

std::vector<double> trace_against(const SymTensorField& g, const SymTensorField& h) {
    if (g.is_isotropic() && h.is_isotropic())
        return {static_cast<double>(g.dim()) * h.iso_scale() / g.iso_scale()};
    std::size_t n = std::max(g.nodes(), h.nodes());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = tensor_ops::trace_in_frame(g.at(i % g.nodes()), h.at(i % h.nodes()));
    return out;
}

TraceComparison trace_comparison_check(const SymTensorField& g0, const SymTensorField& g1,
                                       const SymTensorField& h) {
    std::size_t n = std::max({g0.nodes(), g1.nodes(), h.nodes()});
    TraceComparison worst{0.0, 0.0, true};
    double worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd G0 = g0.at(i % g0.nodes());
        Eigen::MatrixXd G1 = g1.at(i % g1.nodes());
        Eigen::MatrixXd H = h.at(i % h.nodes());
        double dist = tensor_ops::norm_in_frame(G0, G1 - G0);
        if (dist > 0.5)
            throw PreconditionError("trace_comparison_check: ||g1-g0||_{g0} = " +
                                    std::to_string(dist) + " exceeds 1/2");
        double lhs = std::abs(tensor_ops::trace_in_frame(G1, H) -
                              tensor_ops::trace_in_frame(G0, H));
        double rhs = 2.0 * dist * tensor_ops::norm_in_frame(G0, H);
        if (rhs - lhs < worst_slack) {
            worst_slack = rhs - lhs;
            worst.lhs = lhs;
            worst.rhs = rhs;
        }
    }
    worst.pass = worst.lhs <= worst.rhs + 1e-12;
    return worst;
}

} // namespace collarcurv
