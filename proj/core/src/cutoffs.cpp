#include "collarcurv/cutoffs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "collarcurv/errors.hpp"

namespace collarcurv {

namespace {

// dense polynomial helpers, ascending coefficients
using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

double poly_eval(const Poly& a, double x) {
    double acc = 0.0;
    for (std::size_t i = a.size(); i-- > 0;) acc = acc * x + a[i];
    return acc;
}

Poly poly_derive(const Poly& a) {
    if (a.size() <= 1) return {0.0};
    Poly d(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) d[i - 1] = a[i] * static_cast<double>(i);
    return d;
}

Poly poly_int(const Poly& a) {
    Poly c(a.size() + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) c[i + 1] = a[i] / static_cast<double>(i + 1);
    return c;
}

/// p(off + sc * u); safe here because callers keep |off|, |sc| <= 1.
Poly poly_affine(const Poly& p, double off, double sc) {
    Poly out(p.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
        double cik = 1.0;
        double offp = 1.0;
        std::vector<double> offs(k + 1);
        for (std::size_t j = 0; j <= k; ++j) {
            offs[j] = offp;
            offp *= off;
        }
        double scp = 1.0;
        for (std::size_t j = 0; j <= k; ++j) {
            if (j > 0) cik = cik * static_cast<double>(k - j + 1) / static_cast<double>(j);
            out[j] += p[k] * cik * offs[k - j] * scp;
            scp *= sc;
        }
    }
    return out;
}

// degree-7 smoothstep 0 -> 1, zero derivatives through order 3 at both ends
const Poly kStep7 = {0, 0, 0, 0, 35, -84, 70, -20};
// degree-9 smoothstep, zero derivatives through order 4
const Poly kStep9 = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};

// quartic bridge of the base ramp on [1/10, 9/10]:
// (10t+7)(10t-9)^3 / 10240 expanded in t
const Poly kBaseBridge = {-5103.0 / 10240, 9720.0 / 10240, 5400.0 / 10240,
                          -20000.0 / 10240, 10000.0 / 10240};

// bridge interval of the concave ramp and its reshaping windows
constexpr double kA = 0.875;          // bridge start
constexpr double kC = 0.95;           // bridge end
constexpr double kL = kC - kA;
constexpr double kFadeEnd = 0.9;      // base second derivative fades out here
constexpr double kB1Lo = kA, kB1Hi = kA + 0.25 * kL;
constexpr double kB2Lo = kA + 0.05 * kL, kB2Hi = kA + 0.60 * kL;

/// One additive component of the reshaped second derivative: a polynomial
/// shape in its own unit variable y = (t - lo)/width, zero outside
/// [lo, lo+width]. Provides its double antiderivative (from t = lo) as a
/// three-piece ProfileFunction and its exact moment integrals.
struct SecondDerivComponent {
    double lo = 0.0, width = 1.0;
    Poly shape;  // in y

    double hi() const { return lo + width; }

    double integral() const {  // int over t of the component
        Poly P = poly_int(shape);
        return width * poly_eval(P, 1.0);
    }

    /// int_lo^C (C - tau) X(tau) dtau == value of the double antiderivative
    /// at C (with zero initial data at lo), for C >= hi.
    double second_moment_to(double C) const {
        Poly P = poly_int(shape);
        Poly Q = poly_int(P);
        double G1 = poly_eval(Q, 1.0);
        double dG1 = poly_eval(P, 1.0);
        return width * width * G1 + width * dG1 * (C - hi());
    }

    /// Double antiderivative with zero value/slope at lo, scaled by `amp`.
    ProfileFunction double_antiderivative(double amp) const {
        Poly P = poly_int(shape);
        Poly Q = poly_int(P);
        double G1 = poly_eval(Q, 1.0);
        double dG1 = poly_eval(P, 1.0);
        const double w2 = width * width;
        ProfileFunction mid = ProfileFunction::polynomial(Q)
                                  .arg_scaled(1.0 / width)
                                  .shifted_arg(lo)
                                  .scaled(amp * w2);
        ProfileFunction tail = ProfileFunction::polynomial(
            {amp * (w2 * G1 - width * dG1 * hi()), amp * width * dG1});
        return ProfileFunction::piecewise(
            {lo, hi()}, {ProfileFunction::constant(0.0), mid, tail});
    }
};

SecondDerivComponent faded_base_component() {
    SecondDerivComponent c;
    c.lo = kA;
    c.width = kFadeEnd - kA;
    // base''(A + width z) * (1 - step9(z))
    Poly basedd = poly_derive(poly_derive(kBaseBridge));
    Poly in_z = poly_affine(basedd, kA, c.width);
    Poly fade = kStep9;
    for (double& x : fade) x = -x;
    fade[0] += 1.0;
    c.shape = poly_mul(in_z, fade);
    return c;
}

SecondDerivComponent bump_component(double lo, double hi) {
    SecondDerivComponent c;
    c.lo = lo;
    c.width = hi - lo;
    // -1024 y^5 (1-y)^5
    Poly onemy{1.0, -1.0};
    Poly acc{1.0};
    for (int i = 0; i < 5; ++i) acc = poly_mul(acc, onemy);
    Poly y5(6, 0.0);
    y5[5] = 1.0;
    c.shape = poly_mul(y5, acc);
    for (double& x : c.shape) x *= -1024.0;
    return c;
}

} // namespace

ProfileFunction cutoff_base_ramp() {
    return ProfileFunction::piecewise(
        {0.1, 0.9},
        {ProfileFunction::polynomial({-0.5, 1.0}),
         ProfileFunction::polynomial(kBaseBridge),
         ProfileFunction::constant(0.0)});
}

ProfileFunction smooth_concave_ramp() {
    static const ProfileFunction cached = [] {
        const double phiA = poly_eval(kBaseBridge, kA);
        const double dphiA = poly_eval(poly_derive(kBaseBridge), kA);

        SecondDerivComponent base = faded_base_component();
        SecondDerivComponent b1 = bump_component(kB1Lo, kB1Hi);
        SecondDerivComponent b2 = bump_component(kB2Lo, kB2Hi);

        // Moment conditions: slope and value of the bridge both reach 0 at
        // t = C. With X_II the double antiderivative from A,
        //   dphiA + sum int X          = 0
        //   phiA + dphiA L + sum X_II(C) = 0.
        const double r1 = -dphiA - base.integral();
        const double r2 = -(phiA + dphiA * kL) - base.second_moment_to(kC);
        const double I1 = b1.integral(), I2 = b2.integral();
        const double J1 = b1.second_moment_to(kC), J2 = b2.second_moment_to(kC);
        const double det = I1 * J2 - I2 * J1;
        const double mu1 = (r1 * J2 - I2 * r2) / det;
        const double mu2 = (I1 * r2 - J1 * r1) / det;

        ProfileFunction bridge =
            ProfileFunction::polynomial({phiA - dphiA * kA, dphiA}) +
            base.double_antiderivative(1.0) + b1.double_antiderivative(mu1) +
            b2.double_antiderivative(mu2);

        ProfileFunction ramp = ProfileFunction::piecewise(
            {0.1, kA, kC},
            {ProfileFunction::polynomial({-0.5, 1.0}),
             ProfileFunction::polynomial(kBaseBridge), bridge,
             ProfileFunction::constant(0.0)});

        // re-verify the construction before anyone uses it
        ProfileFunction base_ramp = cutoff_base_ramp();
        double worst_c2 = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            double t = 1.0 * i / 4000;
            double dd = ramp.derivative(t, 2);
            if (dd > 1e-11 || dd < -2.0 - 1e-11)
                throw std::logic_error("concave ramp: curvature bound failed");
            double v0 = ramp.value(t);
            double s0 = ramp.derivative(t, 1);
            if (v0 > 1e-11 || v0 < -0.5 - 1e-11 || s0 < -1e-11 || s0 > 1.0 + 1e-11)
                throw std::logic_error("concave ramp: range bound failed");
            for (int d = 0; d <= 2; ++d)
                worst_c2 = std::max(
                    worst_c2, std::abs(ramp.derivative(t, d) - base_ramp.derivative(t, d)));
        }
        if (worst_c2 > 0.125)
            throw std::logic_error("concave ramp: C2 distance to base exceeds 1/8");
        return ramp;
    }();
    return cached;
}

ProfileFunction plateau_step() {
    ProfileFunction step =
        ProfileFunction::polynomial(kStep7).arg_scaled(20.0).shifted_arg(0.95);
    ProfileFunction transition = ProfileFunction::constant(0.5) + step.scaled(-0.5);
    return ProfileFunction::piecewise(
        {0.95, 1.0},
        {ProfileFunction::constant(0.5), transition, ProfileFunction::constant(0.0)});
}

namespace {

struct StepNorms {
    double d1 = 0.0;
    double d2 = 0.0;
};

const StepNorms& plateau_norms() {
    static const StepNorms n = [] {
        ProfileFunction psi = plateau_step();
        StepNorms m;
        for (int i = 0; i <= 20000; ++i) {
            double t = 0.9 + 0.15 * i / 20000;
            m.d1 = std::max(m.d1, std::abs(psi.derivative(t, 1)));
            m.d2 = std::max(m.d2, std::abs(psi.derivative(t, 2)));
        }
        return m;
    }();
    return n;
}

} // namespace

CutoffFamily make_cutoff_family(double delta) {
    if (!(delta > 0.0 && delta <= 0.5))
        throw PreconditionError("cutoff family: delta must lie in (0, 1/2]");
    CutoffFamily f;
    f.delta = delta;
    double root = std::sqrt(delta);
    f.concave_part = smooth_concave_ramp().arg_scaled(1.0 / delta).scaled(delta);
    f.plateau_part = plateau_step().arg_scaled(1.0 / root).scaled(delta);
    f.cutoff = f.concave_part + f.plateau_part;
    const StepNorms& norms = plateau_norms();
    f.slope_bound = std::max(1.0 + norms.d1 / std::sqrt(2.0), norms.d2);
    f.linear_zone = delta / 10.0;
    return f;
}

double stage_one_weight(double s) {
    if (s < 0.0 || s > 1.0) throw PreconditionError("stage weight: s outside [0,1]");
    return s <= 0.5 ? 1.0 : 2.0 * (1.0 - s);
}

double stage_two_weight(double s) {
    if (s < 0.0 || s > 1.0) throw PreconditionError("stage weight: s outside [0,1]");
    return s <= 0.5 ? 1.0 - 2.0 * s : 0.0;
}

} // namespace collarcurv
