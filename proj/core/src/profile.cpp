#include "collarcurv/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace collarcurv {
namespace detail {

class ProfileNode {
public:
    virtual ~ProfileNode() = default;
    virtual double eval(double t, int order, Side side) const = 0;
    virtual nlohmann::json to_json() const = 0;
};

namespace {

using NodePtr = std::shared_ptr<const ProfileNode>;

class PolyNode final : public ProfileNode {
public:
    explicit PolyNode(std::vector<double> c) : c_(std::move(c)) {
        while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
        if (c_.empty()) c_.push_back(0.0);
    }
    double eval(double t, int order, Side) const override {
        double acc = 0.0;
        for (std::size_t i = c_.size(); i-- > static_cast<std::size_t>(order);) {
            double f = 1.0;
            for (int j = 0; j < order; ++j) f *= static_cast<double>(i - j);
            acc = acc * t + f * c_[i];
        }
        return acc;
    }
    nlohmann::json to_json() const override { return {{"poly", c_}}; }
    const std::vector<double>& coeffs() const { return c_; }

private:
    std::vector<double> c_;
};

class TrigNode final : public ProfileNode {
public:
    TrigNode(bool is_sin, double amp, double freq, double phase)
        : is_sin_(is_sin), amp_(amp), freq_(freq), phase_(phase) {}
    double eval(double t, int order, Side) const override {
        // d^k/dt^k sin(w t + p) = w^k sin(w t + p + k pi/2), same shift for cos
        double shift = order * (M_PI / 2.0);
        double w = amp_;
        for (int j = 0; j < order; ++j) w *= freq_;
        double arg = freq_ * t + phase_ + shift;
        return w * (is_sin_ ? std::sin(arg) : std::cos(arg));
    }
    nlohmann::json to_json() const override {
        return {{"trig", {{"kind", is_sin_ ? "sin" : "cos"},
                          {"amp", amp_}, {"freq", freq_}, {"phase", phase_}}}};
    }

private:
    bool is_sin_;
    double amp_, freq_, phase_;
};

class SumNode final : public ProfileNode {
public:
    explicit SumNode(std::vector<NodePtr> terms) : terms_(std::move(terms)) {}
    double eval(double t, int order, Side side) const override {
        double acc = 0.0;
        for (const auto& n : terms_) acc += n->eval(t, order, side);
        return acc;
    }
    nlohmann::json to_json() const override {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& n : terms_) arr.push_back(n->to_json());
        return {{"sum", arr}};
    }
    const std::vector<NodePtr>& terms() const { return terms_; }

private:
    std::vector<NodePtr> terms_;
};

class ProductNode final : public ProfileNode {
public:
    ProductNode(NodePtr a, NodePtr b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(double t, int order, Side side) const override {
        // Leibniz rule; order <= 4 so the binomial table is tiny
        static const int binom[5][5] = {
            {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0},
            {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
        double acc = 0.0;
        for (int j = 0; j <= order; ++j)
            acc += binom[order][j] * a_->eval(t, j, side) * b_->eval(t, order - j, side);
        return acc;
    }
    nlohmann::json to_json() const override {
        return {{"product", {a_->to_json(), b_->to_json()}}};
    }

private:
    NodePtr a_, b_;
};

class ArgScaleNode final : public ProfileNode {
public:
    ArgScaleNode(double a, NodePtr f) : a_(a), f_(std::move(f)) {}
    double eval(double t, int order, Side side) const override {
        // one-sided limits flip when the argument scale is negative
        Side s = side;
        if (a_ < 0) s = (side == Side::Right) ? Side::Left : Side::Right;
        double w = 1.0;
        for (int j = 0; j < order; ++j) w *= a_;
        return w * f_->eval(a_ * t, order, s);
    }
    nlohmann::json to_json() const override {
        return {{"argscale", {{"factor", a_}, {"of", f_->to_json()}}}};
    }

private:
    double a_;
    NodePtr f_;
};

class ArgShiftNode final : public ProfileNode {
public:
    ArgShiftNode(double t0, NodePtr f) : t0_(t0), f_(std::move(f)) {}
    double eval(double t, int order, Side side) const override {
        return f_->eval(t - t0_, order, side);
    }
    nlohmann::json to_json() const override {
        return {{"argshift", {{"offset", t0_}, {"of", f_->to_json()}}}};
    }

private:
    double t0_;
    NodePtr f_;
};

class PiecewiseNode final : public ProfileNode {
public:
    PiecewiseNode(std::vector<double> breaks, std::vector<NodePtr> pieces)
        : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
        if (pieces_.size() != breaks_.size() + 1)
            throw std::invalid_argument("piecewise: need one more piece than breakpoints");
        if (!std::is_sorted(breaks_.begin(), breaks_.end()))
            throw std::invalid_argument("piecewise: breakpoints must be ascending");
    }
    double eval(double t, int order, Side side) const override {
        std::size_t i = 0;
        while (i < breaks_.size() && (side == Side::Right ? t >= breaks_[i] : t > breaks_[i])) ++i;
        return pieces_[i]->eval(t, order, side);
    }
    nlohmann::json to_json() const override {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : pieces_) arr.push_back(p->to_json());
        return {{"piecewise", {{"breaks", breaks_}, {"pieces", arr}}}};
    }

private:
    std::vector<double> breaks_;
    std::vector<NodePtr> pieces_;
};

const PolyNode* as_poly(const NodePtr& n) { return dynamic_cast<const PolyNode*>(n.get()); }

} // namespace
} // namespace detail

using detail::NodePtr;

ProfileFunction::ProfileFunction()
    : node_(std::make_shared<detail::PolyNode>(std::vector<double>{0.0})) {}

ProfileFunction::ProfileFunction(std::shared_ptr<const detail::ProfileNode> node)
    : node_(std::move(node)) {}

ProfileFunction ProfileFunction::constant(double c) {
    return polynomial({c});
}

ProfileFunction ProfileFunction::polynomial(std::vector<double> coeffs) {
    return ProfileFunction(std::make_shared<detail::PolyNode>(std::move(coeffs)));
}

ProfileFunction ProfileFunction::sine(double amp, double freq, double phase) {
    return ProfileFunction(std::make_shared<detail::TrigNode>(true, amp, freq, phase));
}

ProfileFunction ProfileFunction::cosine(double amp, double freq, double phase) {
    return ProfileFunction(std::make_shared<detail::TrigNode>(false, amp, freq, phase));
}

ProfileFunction ProfileFunction::piecewise(std::vector<double> breaks,
                                           std::vector<ProfileFunction> pieces) {
    std::vector<NodePtr> nodes;
    nodes.reserve(pieces.size());
    for (auto& p : pieces) nodes.push_back(p.node_);
    return ProfileFunction(
        std::make_shared<detail::PiecewiseNode>(std::move(breaks), std::move(nodes)));
}

ProfileFunction ProfileFunction::operator+(const ProfileFunction& o) const {
    // fold polynomial + polynomial into one node so jet surgery stays exact
    const auto* pa = detail::as_poly(node_);
    const auto* pb = detail::as_poly(o.node_);
    if (pa && pb) {
        std::vector<double> c(std::max(pa->coeffs().size(), pb->coeffs().size()), 0.0);
        for (std::size_t i = 0; i < pa->coeffs().size(); ++i) c[i] += pa->coeffs()[i];
        for (std::size_t i = 0; i < pb->coeffs().size(); ++i) c[i] += pb->coeffs()[i];
        return polynomial(std::move(c));
    }
    return ProfileFunction(
        std::make_shared<detail::SumNode>(std::vector<NodePtr>{node_, o.node_}));
}

ProfileFunction ProfileFunction::operator-(const ProfileFunction& o) const {
    return *this + o.scaled(-1.0);
}

ProfileFunction ProfileFunction::operator*(const ProfileFunction& o) const {
    return ProfileFunction(std::make_shared<detail::ProductNode>(node_, o.node_));
}

ProfileFunction ProfileFunction::scaled(double c) const {
    if (const auto* p = detail::as_poly(node_)) {
        std::vector<double> cc = p->coeffs();
        for (double& x : cc) x *= c;
        return polynomial(std::move(cc));
    }
    return ProfileFunction(
        std::make_shared<detail::ProductNode>(constant(c).node_, node_));
}

ProfileFunction ProfileFunction::arg_scaled(double a) const {
    return ProfileFunction(std::make_shared<detail::ArgScaleNode>(a, node_));
}

ProfileFunction ProfileFunction::shifted_arg(double t0) const {
    return ProfileFunction(std::make_shared<detail::ArgShiftNode>(t0, node_));
}

double ProfileFunction::value(double t, Side side) const { return node_->eval(t, 0, side); }

double ProfileFunction::derivative(double t, int order, Side side) const {
    if (order < 0 || order > kMaxDerivative)
        throw std::invalid_argument("profile derivative order out of range");
    return node_->eval(t, order, side);
}

bool ProfileFunction::is_zero() const {
    if (const auto* p = detail::as_poly(node_)) {
        for (double c : p->coeffs())
            if (c != 0.0) return false;
        return true;
    }
    return false;
}

bool ProfileFunction::as_polynomial(std::vector<double>& coeffs) const {
    if (const auto* p = detail::as_poly(node_)) {
        coeffs = p->coeffs();
        return true;
    }
    return false;
}

ProfileFunction ProfileFunction::minus_jet1() const {
    if (const auto* p = detail::as_poly(node_)) {
        std::vector<double> c = p->coeffs();
        if (c.size() > 0) c[0] = 0.0;
        if (c.size() > 1) c[1] = 0.0;
        return polynomial(std::move(c));
    }
    double v0 = value(0.0);
    double v1 = derivative(0.0, 1);
    return *this + polynomial({-v0, -v1});
}

ProfileFunction ProfileFunction::minus_jet2() const {
    if (const auto* p = detail::as_poly(node_)) {
        std::vector<double> c = p->coeffs();
        if (c.size() > 0) c[0] = 0.0;
        if (c.size() > 1) c[1] = 0.0;
        if (c.size() > 2) c[2] = 0.0;
        return polynomial(std::move(c));
    }
    double v0 = value(0.0);
    double v1 = derivative(0.0, 1);
    double v2 = derivative(0.0, 2);
    return *this + polynomial({-v0, -v1, -0.5 * v2});
}

nlohmann::json ProfileFunction::to_json() const { return node_->to_json(); }

ProfileFunction ProfileFunction::from_json(const nlohmann::json& j) {
    if (j.contains("poly")) return polynomial(j.at("poly").get<std::vector<double>>());
    if (j.contains("trig")) {
        const auto& t = j.at("trig");
        bool is_sin = t.at("kind").get<std::string>() == "sin";
        double amp = t.at("amp"), freq = t.at("freq"), phase = t.at("phase");
        return is_sin ? sine(amp, freq, phase) : cosine(amp, freq, phase);
    }
    if (j.contains("sum")) {
        ProfileFunction acc;
        bool first = true;
        for (const auto& e : j.at("sum")) {
            ProfileFunction f = from_json(e);
            acc = first ? f : acc + f;
            first = false;
        }
        return acc;
    }
    if (j.contains("product")) {
        const auto& p = j.at("product");
        return from_json(p.at(0)) * from_json(p.at(1));
    }
    if (j.contains("argscale")) {
        const auto& a = j.at("argscale");
        return from_json(a.at("of")).arg_scaled(a.at("factor").get<double>());
    }
    if (j.contains("argshift")) {
        const auto& a = j.at("argshift");
        return from_json(a.at("of")).shifted_arg(a.at("offset").get<double>());
    }
    if (j.contains("piecewise")) {
        const auto& p = j.at("piecewise");
        std::vector<double> breaks = p.at("breaks").get<std::vector<double>>();
        std::vector<ProfileFunction> pieces;
        for (const auto& e : p.at("pieces")) pieces.push_back(from_json(e));
        return piecewise(std::move(breaks), std::move(pieces));
    }
    throw std::invalid_argument("unknown profile node: " + j.dump());
}

} // namespace collarcurv
