#include "collarcurv/taper.hpp"

#include <cmath>
#include <vector>

#include "collarcurv/errors.hpp"

namespace collarcurv {

namespace {

/// Piecewise-linear second derivative on [0,1]:
///   2 on [0,a]; 2 -> -eta on [a,2a]; -eta on [2a,b];
///   -eta -> mu on [b,b+a]; mu on [b+a,1-a]; mu -> 0 on [1-a,1].
/// The long -eta plateau drains the slope accumulated by the t^2 head; the
/// small positive tail mu lifts the slope back to zero while the value
/// settles at zero. Two moment conditions (total integral and first
/// moment) pin (b, mu).
struct Shape {
    double a, eta, b, mu;

    struct Piece {
        double lo, hi, k0, k1;
    };

    std::vector<Piece> pieces() const {
        return {{0.0, a, 2.0, 2.0},
                {a, 2.0 * a, 2.0, -eta},
                {2.0 * a, b, -eta, -eta},
                {b, b + a, -eta, mu},
                {b + a, 1.0 - a, mu, mu},
                {1.0 - a, 1.0, mu, 0.0}};
    }

    // integral of kappa and of (1 - t) kappa over [0, 1]
    static std::pair<double, double> moments(const std::vector<Piece>& ps) {
        double I = 0.0, J = 0.0;
        for (const auto& p : ps) {
            double L = p.hi - p.lo;
            if (L <= 0.0) continue;
            double slope = (p.k1 - p.k0) / L;
            I += 0.5 * (p.k0 + p.k1) * L;
            // int (1 - lo - u)(k0 + slope u) du over [0, L]
            double c0 = (1.0 - p.lo) * p.k0;
            double c1 = (1.0 - p.lo) * slope - p.k0;
            double c2 = -slope;
            J += c0 * L + 0.5 * c1 * L * L + c2 * L * L * L / 3.0;
        }
        return {I, J};
    }

    bool feasible() const { return b > 2.0 * a && b + a < 1.0 - a && mu >= 0.0 && mu <= 2.0; }
};

/// Given mu, the total-integral condition is affine in b; solve it directly.
double solve_b(double a, double eta, double mu) {
    Shape s{a, eta, 0.5, mu};
    auto [i1, j1] = Shape::moments(s.pieces());
    (void)j1;
    s.b = 0.6;
    auto [i2, j2] = Shape::moments(s.pieces());
    (void)j2;
    double slope = (i2 - i1) / 0.1;
    return 0.5 - i1 / slope;
}

std::optional<Shape> solve_shape(double eta) {
    const double a = eta / 8.0;
    auto first_moment = [&](double mu) -> std::optional<double> {
        Shape s{a, eta, solve_b(a, eta, mu), mu};
        if (!s.feasible()) return std::nullopt;
        return Shape::moments(s.pieces()).second;
    };
    // log scan for a sign change, then bisection
    std::optional<std::pair<double, double>> prev;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    bool found = false;
    for (int i = 0; i <= 400; ++i) {
        double mu = std::pow(10.0, -14.0 + (14.0 + std::log10(2.0)) * i / 400.0);
        auto g = first_moment(mu);
        if (!g) {
            prev.reset();
            continue;
        }
        if (prev && prev->second * *g <= 0.0) {
            bracket_lo = prev->first;
            bracket_hi = mu;
            found = true;
            break;
        }
        prev = {mu, *g};
    }
    if (!found) return std::nullopt;
    for (int i = 0; i < 200; ++i) {
        double mid = std::sqrt(bracket_lo * bracket_hi);
        auto gm = first_moment(mid);
        auto gl = first_moment(bracket_lo);
        if (!gm || !gl) return std::nullopt;
        if (*gl * *gm <= 0.0)
            bracket_hi = mid;
        else
            bracket_lo = mid;
    }
    double mu = std::sqrt(bracket_lo * bracket_hi);
    Shape s{a, eta, solve_b(a, eta, mu), mu};
    if (!s.feasible()) return std::nullopt;
    return s;
}

} // namespace

std::optional<JetTaper> make_jet_taper(double support, double eta) {
    if (support <= 0.0 || eta <= 0.0)
        throw PreconditionError("jet taper: support and eta must be positive");
    auto shape = solve_shape(eta);
    if (!shape) return std::nullopt;

    // integrate the normalized second derivative twice, piecewise cubics in
    // local coordinates
    auto ps = shape->pieces();
    std::vector<ProfileFunction> pieces;
    std::vector<double> breaks;
    double v = 0.0, q = 0.0;
    for (const auto& p : ps) {
        double L = p.hi - p.lo;
        double slope = L > 0.0 ? (p.k1 - p.k0) / L : 0.0;
        // q(lo + u) = q + v u + k0 u^2/2 + slope u^3/6
        pieces.push_back(ProfileFunction::polynomial({q, v, 0.5 * p.k0, slope / 6.0})
                             .shifted_arg(p.lo));
        breaks.push_back(p.hi);
        v += 0.5 * (p.k0 + p.k1) * L;
        q = pieces.back().value(p.hi);
    }
    // residuals of the moment solve; must be negligible for the blend to
    // vanish cleanly at the support edge
    if (std::abs(v) > 1e-10 || std::abs(q) > 1e-10) return std::nullopt;
    pieces.push_back(ProfileFunction::constant(0.0));

    ProfileFunction unit = ProfileFunction::piecewise(breaks, pieces);
    JetTaper taper;
    taper.support = support;
    taper.eta = eta;
    taper.quad_zone = shape->a * support;
    taper.q = unit.arg_scaled(1.0 / support).scaled(support * support);
    return taper;
}

ProfileFunction remainder_bump(double support) {
    if (support <= 0.0) throw PreconditionError("remainder bump: support must be positive");
    // 1 - step7((t - support/2) / (support/2)) on the easing interval
    const std::vector<double> step7 = {0, 0, 0, 0, 35, -84, 70, -20};
    ProfileFunction ease = ProfileFunction::constant(1.0) +
                           ProfileFunction::polynomial(step7)
                               .arg_scaled(2.0 / support)
                               .shifted_arg(0.5 * support)
                               .scaled(-1.0);
    return ProfileFunction::piecewise(
        {0.5 * support, support},
        {ProfileFunction::constant(1.0), ease, ProfileFunction::constant(0.0)});
}

} // namespace collarcurv
