#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace collarcurv {

/// Which one-sided limit to take when evaluating a piecewise function at a
/// breakpoint. Away from breakpoints both sides agree.
enum class Side { Left, Right };

namespace detail {
class ProfileNode;
}

/// Closed-form scalar function of t with exact derivative rules up to
/// order 4. Immutable; copies share the expression tree.
///
/// Constructors cover what collar metrics need: polynomials, sin/cos of
/// affine arguments, sums, products, argument scaling and piecewise glue.
/// No finite differences anywhere: derivative(t, k) applies the chain,
/// product and power rules symbolically.
class ProfileFunction {
public:
    static constexpr int kMaxDerivative = 4;

    ProfileFunction();  // zero function

    static ProfileFunction constant(double c);
    static ProfileFunction polynomial(std::vector<double> coeffs);  // sum c_i t^i
    /// amp * sin(freq * t + phase)
    static ProfileFunction sine(double amp, double freq, double phase);
    /// amp * cos(freq * t + phase)
    static ProfileFunction cosine(double amp, double freq, double phase);
    /// Pieces glued at ascending breakpoints: pieces[0] on (-inf, breaks[0]),
    /// pieces[i] on [breaks[i-1], breaks[i]), pieces.back() on [breaks.back(), inf).
    static ProfileFunction piecewise(std::vector<double> breaks,
                                     std::vector<ProfileFunction> pieces);

    ProfileFunction operator+(const ProfileFunction& o) const;
    ProfileFunction operator-(const ProfileFunction& o) const;
    ProfileFunction operator*(const ProfileFunction& o) const;
    ProfileFunction scaled(double c) const;          // c * f(t)
    ProfileFunction arg_scaled(double a) const;      // f(a * t)
    ProfileFunction shifted_arg(double t0) const;    // f(t - t0)

    double value(double t, Side side = Side::Right) const;
    double derivative(double t, int order, Side side = Side::Right) const;

    /// Exact test: true when the expression is syntactically the zero
    /// function (all polynomial coefficients zero after pruning). Used to
    /// drop vanishing correction terms so trivial schedules stay constant
    /// term-for-term.
    bool is_zero() const;

    /// True when the function is a plain polynomial; coefficients returned
    /// via `poly_coeffs`. Enables exact jet subtraction for such terms.
    bool as_polynomial(std::vector<double>& coeffs) const;

    /// f minus its 1-jet at 0: f(t) - f(0) - f'(0) t. Exact coefficient
    /// surgery for polynomials, symbolic subtraction otherwise.
    ProfileFunction minus_jet1() const;

    /// f minus its 2-jet at 0: f(t) - f(0) - f'(0) t - f''(0) t^2 / 2.
    ProfileFunction minus_jet2() const;

    nlohmann::json to_json() const;
    static ProfileFunction from_json(const nlohmann::json& j);

private:
    explicit ProfileFunction(std::shared_ptr<const detail::ProfileNode> node);
    std::shared_ptr<const detail::ProfileNode> node_;
};

} // namespace collarcurv
