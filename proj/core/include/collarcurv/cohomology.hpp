#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace collarcurv {

using Rational = boost::multiprecision::cpp_rational;

/// Finite graded-commutative algebra over Q with an integration functional
/// supported on the top degree. Multiplication is given by structure
/// constants over a homogeneous basis; associativity and graded
/// commutativity are checked exhaustively on construction.
class CohomologyModel {
public:
    struct Entry {
        std::size_t k;
        Rational c;
    };

    CohomologyModel(std::vector<std::string> basis, std::vector<int> degrees,
                    std::vector<std::vector<std::vector<Entry>>> products,
                    std::vector<Rational> integral);

    std::size_t size() const { return degrees_.size(); }
    int degree(std::size_t i) const { return degrees_[i]; }
    int top_degree() const { return top_; }
    int half_dim() const { return top_ / 2; }  // m with top degree 2m
    const std::vector<std::string>& basis() const { return names_; }
    const std::vector<Entry>& product(std::size_t i, std::size_t j) const {
        return products_[i][j];
    }
    const Rational& integral_coeff(std::size_t i) const { return integral_[i]; }

    /// Truncated polynomial algebra Q[x]/(x^{m+1}) with deg x = 2 and
    /// integral of x^m equal to `top`.
    static CohomologyModel truncated_polynomial(int m, Rational top = 1);
    /// Exterior algebra on `g` degree-1 generators, integral 1 on the top
    /// monomial.
    static CohomologyModel exterior(int g);
    /// Tensor product with the graded sign rule; integration multiplies.
    static CohomologyModel tensor(const CohomologyModel& a, const CohomologyModel& b);

    nlohmann::json to_json() const;
    static CohomologyModel from_json(const nlohmann::json& j);

private:
    void validate() const;
    std::vector<std::string> names_;
    std::vector<int> degrees_;
    std::vector<std::vector<std::vector<Entry>>> products_;
    std::vector<Rational> integral_;
    int top_ = 0;
};

/// Element of a model: dense rational coordinates over the basis.
class Element {
public:
    Element() = default;
    Element(const CohomologyModel* model, std::vector<Rational> coeff);
    static Element zero(const CohomologyModel& model);
    static Element unit(const CohomologyModel& model);  // the degree-0 basis element

    const CohomologyModel* model() const { return model_; }
    const std::vector<Rational>& coeff() const { return c_; }
    Rational& operator[](std::size_t i) { return c_[i]; }
    const Rational& operator[](std::size_t i) const { return c_[i]; }

    Element operator+(const Element& o) const;
    Element operator*(const Element& o) const;
    Element scaled(const Rational& r) const;
    bool is_zero() const;
    /// Projection to the homogeneous part of the given degree.
    Element part(int degree) const;
    Rational integrate() const;

private:
    const CohomologyModel* model_ = nullptr;
    std::vector<Rational> c_;
};

/// Chern-character data of a bundle: rank plus one component per even
/// degree 2j, j = 1..m. Rationals exact.
struct ChernCharacter {
    Rational rank = 0;
    std::vector<Element> comp;  // comp[j-1] has degree 2(j+1-1) = 2j

    const CohomologyModel* model() const {
        return comp.empty() ? nullptr : comp[0].model();
    }
    /// rank + sum of components as a mixed element.
    Element mixed() const;
    nlohmann::json to_json() const;
    static ChernCharacter from_json(const nlohmann::json& j, const CohomologyModel& model);
};

/// Adams operation on character data: rank fixed, j-th component scaled by
/// k^j.
ChernCharacter adams(const ChernCharacter& ch, unsigned k);

/// Character of the tensor product of the Adams images for one multi-index:
/// the ring product of adams(ch, k_i), truncated by the model. Rank r^m.
ChernCharacter adams_multi(const ChernCharacter& ch, const std::vector<unsigned>& k);

/// True when some top-degree character number is nonzero: there are
/// gamma_1 + ... + gamma_m = m with integral of ch_{gamma_1} ... ch_{gamma_m}
/// nonzero (zero indices contribute rank factors).
bool admissible(const ChernCharacter& ch);

struct GridSearchResult {
    std::vector<unsigned> k;
    Rational value;  // P(k), exactly
};

/// Lexicographically least k in {0..m}^m with
/// integral(omega ^ (ch(Psi_k E) - r^m)) != 0. Admissibility is checked
/// first and guarantees existence; exhaustion therefore aborts the run.
GridSearchResult nonvanishing_grid_search(const Element& omega, const ChernCharacter& ch);

/// Specialization omega = 1; also reports the sign of the integral.
struct TotalChernResult {
    std::vector<unsigned> k;
    Rational value;
    int sign;  // -1, +1
};
TotalChernResult total_ch_nonzero(const ChernCharacter& ch);

/// Exact multivariate polynomial fit of P over the grid {0..m}^m with
/// monomials of total degree <= m.
struct GridPolynomial {
    bool consistent = false;  // a degree <= m polynomial matches all values
    bool zero = false;        // the fitted polynomial is identically zero
    std::vector<Rational> coeffs;
    std::vector<std::vector<unsigned>> monomials;
};
GridPolynomial interpolate_grid_polynomial(const Element& omega, const ChernCharacter& ch);

/// Evaluates P(k) for one multi-index (shared by search and interpolation).
Rational pairing_value(const Element& omega, const ChernCharacter& ch,
                       const std::vector<unsigned>& k);

/// Character of the external tensor product on the tensor model, together
/// with the product identity integral(ch_N x ch_M) = integral * integral.
/// The model is shared so the element's back-pointer survives moves.
struct KunnethResult {
    std::shared_ptr<CohomologyModel> model;
    Element mixed;           // ch of the product bundle
    Rational integral;       // over the product model
    Rational factor_product; // integral(ch_N) * integral(ch_M)
};
KunnethResult kunneth_product(const ChernCharacter& chN, const ChernCharacter& chM);

} // namespace collarcurv
