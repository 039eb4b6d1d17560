#include "collarcurv/cohomology.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "collarcurv/errors.hpp"

namespace collarcurv {

namespace {

Rational parse_rational(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) return Rational(j.get<std::string>());
    throw PreconditionError("rational entries must be integers or \"p/q\" strings");
}

nlohmann::json dump_rational(const Rational& r) {
    if (boost::multiprecision::denominator(r) == 1) {
        const auto& num = boost::multiprecision::numerator(r);
        if (num >= std::numeric_limits<long long>::min() &&
            num <= std::numeric_limits<long long>::max())
            return static_cast<long long>(num);
    }
    return r.str();
}

} // namespace

CohomologyModel::CohomologyModel(std::vector<std::string> basis, std::vector<int> degrees,
                                 std::vector<std::vector<std::vector<Entry>>> products,
                                 std::vector<Rational> integral)
    : names_(std::move(basis)),
      degrees_(std::move(degrees)),
      products_(std::move(products)),
      integral_(std::move(integral)) {
    if (names_.size() != degrees_.size() || names_.size() != integral_.size() ||
        products_.size() != names_.size())
        throw PreconditionError("cohomology model: inconsistent table sizes");
    top_ = *std::max_element(degrees_.begin(), degrees_.end());
    if (top_ % 2 != 0) throw PreconditionError("cohomology model: top degree must be even");
    validate();
}

void CohomologyModel::validate() const {
    const std::size_t m = size();
    for (std::size_t i = 0; i < m; ++i) {
        if (products_[i].size() != m)
            throw PreconditionError("cohomology model: ragged product table");
        for (std::size_t j = 0; j < m; ++j)
            for (const auto& e : products_[i][j]) {
                if (e.k >= m) throw PreconditionError("cohomology model: product index range");
                if (e.c != 0 && degrees_[e.k] != degrees_[i] + degrees_[j])
                    throw PreconditionError("cohomology model: product not graded");
            }
    }
    // integration supported on the top degree only
    for (std::size_t i = 0; i < m; ++i)
        if (integral_[i] != 0 && degrees_[i] != top_)
            throw PreconditionError("cohomology model: integral off the top degree");

    auto mul = [&](std::size_t i, std::size_t j) {
        std::vector<Rational> out(m, Rational(0));
        for (const auto& e : products_[i][j]) out[e.k] += e.c;
        return out;
    };
    // graded commutativity on the basis
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<Rational> ab = mul(i, j), ba = mul(j, i);
            int sign = (degrees_[i] * degrees_[j]) % 2 == 0 ? 1 : -1;
            for (std::size_t k = 0; k < m; ++k)
                if (ab[k] != sign * ba[k])
                    throw PreconditionError("cohomology model: not graded-commutative");
        }
    // associativity on the basis
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k) {
                std::vector<Rational> left(m, Rational(0)), right(m, Rational(0));
                for (const auto& e : products_[i][j])
                    for (const auto& f : products_[e.k][k]) left[f.k] += e.c * f.c;
                for (const auto& e : products_[j][k])
                    for (const auto& f : products_[i][e.k]) right[f.k] += e.c * f.c;
                if (left != right)
                    throw PreconditionError("cohomology model: not associative");
            }
}

CohomologyModel CohomologyModel::truncated_polynomial(int m, Rational top) {
    if (m < 1) throw PreconditionError("truncated polynomial model needs m >= 1");
    std::vector<std::string> names;
    std::vector<int> degrees;
    std::vector<Rational> integral;
    for (int i = 0; i <= m; ++i) {
        names.push_back(i == 0 ? "1" : (i == 1 ? "x" : "x^" + std::to_string(i)));
        degrees.push_back(2 * i);
        integral.push_back(i == m ? top : Rational(0));
    }
    std::vector<std::vector<std::vector<Entry>>> products(
        m + 1, std::vector<std::vector<Entry>>(m + 1));
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j)
            if (i + j <= m) products[i][j] = {{static_cast<std::size_t>(i + j), Rational(1)}};
    return CohomologyModel(std::move(names), std::move(degrees), std::move(products),
                           std::move(integral));
}

CohomologyModel CohomologyModel::exterior(int g) {
    if (g < 1 || g > 10) throw PreconditionError("exterior model needs 1 <= g <= 10");
    const std::size_t m = 1u << g;
    std::vector<std::string> names(m);
    std::vector<int> degrees(m);
    std::vector<Rational> integral(m, Rational(0));
    for (std::size_t s = 0; s < m; ++s) {
        std::string nm;
        int d = 0;
        for (int b = 0; b < g; ++b)
            if (s & (1u << b)) {
                nm += (nm.empty() ? "e" : "^e") + std::to_string(b + 1);
                ++d;
            }
        names[s] = nm.empty() ? "1" : nm;
        degrees[s] = d;
    }
    integral[m - 1] = 1;
    std::vector<std::vector<std::vector<Entry>>> products(
        m, std::vector<std::vector<Entry>>(m));
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t t = 0; t < m; ++t) {
            if (s & t) continue;  // repeated generator
            // sign of interleaving the two ordered monomials
            int sign = 1;
            for (int b = 0; b < g; ++b)
                if (t & (1u << b)) {
                    unsigned higher = s >> (b + 1);
                    sign *= (__builtin_popcount(higher) % 2 == 0) ? 1 : -1;
                }
            products[s][t] = {{s | t, Rational(sign)}};
        }
    return CohomologyModel(std::move(names), std::move(degrees), std::move(products),
                           std::move(integral));
}

CohomologyModel CohomologyModel::tensor(const CohomologyModel& a, const CohomologyModel& b) {
    const std::size_t na = a.size(), nb = b.size();
    auto idx = [&](std::size_t i, std::size_t j) { return i * nb + j; };
    std::vector<std::string> names(na * nb);
    std::vector<int> degrees(na * nb);
    std::vector<Rational> integral(na * nb, Rational(0));
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            names[idx(i, j)] = a.basis()[i] + "|" + b.basis()[j];
            degrees[idx(i, j)] = a.degree(i) + b.degree(j);
            integral[idx(i, j)] = a.integral_coeff(i) * b.integral_coeff(j);
        }
    std::vector<std::vector<std::vector<Entry>>> products(
        na * nb, std::vector<std::vector<Entry>>(na * nb));
    for (std::size_t i1 = 0; i1 < na; ++i1)
        for (std::size_t j1 = 0; j1 < nb; ++j1)
            for (std::size_t i2 = 0; i2 < na; ++i2)
                for (std::size_t j2 = 0; j2 < nb; ++j2) {
                    // (x1 (x) y1)(x2 (x) y2) = (-1)^{|y1||x2|} x1x2 (x) y1y2
                    int sign = (b.degree(j1) * a.degree(i2)) % 2 == 0 ? 1 : -1;
                    std::vector<Entry> out;
                    for (const auto& ea : a.product(i1, i2))
                        for (const auto& eb : b.product(j1, j2))
                            out.push_back({idx(ea.k, eb.k), sign * ea.c * eb.c});
                    products[idx(i1, j1)][idx(i2, j2)] = std::move(out);
                }
    return CohomologyModel(std::move(names), std::move(degrees), std::move(products),
                           std::move(integral));
}

nlohmann::json CohomologyModel::to_json() const {
    nlohmann::json prods = nlohmann::json::array();
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < size(); ++j)
            for (const auto& e : products_[i][j])
                if (e.c != 0)
                    prods.push_back({i, j, e.k, dump_rational(e.c)});
    nlohmann::json integral = nlohmann::json::array();
    for (const auto& r : integral_) integral.push_back(dump_rational(r));
    return {{"basis", names_}, {"degrees", degrees_}, {"products", prods},
            {"integral", integral}};
}

CohomologyModel CohomologyModel::from_json(const nlohmann::json& j) {
    std::vector<std::string> names = j.at("basis").get<std::vector<std::string>>();
    std::vector<int> degrees = j.at("degrees").get<std::vector<int>>();
    const std::size_t m = names.size();
    std::vector<std::vector<std::vector<Entry>>> products(
        m, std::vector<std::vector<Entry>>(m));
    for (const auto& e : j.at("products")) {
        std::size_t a = e.at(0).get<std::size_t>();
        std::size_t b = e.at(1).get<std::size_t>();
        std::size_t k = e.at(2).get<std::size_t>();
        products.at(a).at(b).push_back({k, parse_rational(e.at(3))});
    }
    std::vector<Rational> integral;
    for (const auto& e : j.at("integral")) integral.push_back(parse_rational(e));
    return CohomologyModel(std::move(names), std::move(degrees), std::move(products),
                           std::move(integral));
}

Element::Element(const CohomologyModel* model, std::vector<Rational> coeff)
    : model_(model), c_(std::move(coeff)) {
    if (!model_ || c_.size() != model_->size())
        throw PreconditionError("element: coefficient size mismatch");
}

Element Element::zero(const CohomologyModel& model) {
    return Element(&model, std::vector<Rational>(model.size(), Rational(0)));
}

Element Element::unit(const CohomologyModel& model) {
    Element e = zero(model);
    for (std::size_t i = 0; i < model.size(); ++i)
        if (model.degree(i) == 0) {
            e[i] = 1;
            return e;
        }
    throw PreconditionError("element: model has no degree-0 basis element");
}

Element Element::operator+(const Element& o) const {
    if (model_ != o.model_) throw PreconditionError("element: model mismatch");
    Element r = *this;
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
    return r;
}

Element Element::operator*(const Element& o) const {
    if (model_ != o.model_) throw PreconditionError("element: model mismatch");
    Element r = zero(*model_);
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        for (std::size_t j = 0; j < c_.size(); ++j) {
            if (o.c_[j] == 0) continue;
            for (const auto& e : model_->product(i, j)) r.c_[e.k] += c_[i] * o.c_[j] * e.c;
        }
    }
    return r;
}

Element Element::scaled(const Rational& s) const {
    Element r = *this;
    for (auto& x : r.c_) x *= s;
    return r;
}

bool Element::is_zero() const {
    for (const auto& x : c_)
        if (x != 0) return false;
    return true;
}

Element Element::part(int degree) const {
    Element r = zero(*model_);
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (model_->degree(i) == degree) r.c_[i] = c_[i];
    return r;
}

Rational Element::integrate() const {
    Rational s = 0;
    for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * model_->integral_coeff(i);
    return s;
}

Element ChernCharacter::mixed() const {
    if (comp.empty()) throw PreconditionError("chern character: no components");
    Element e = Element::unit(*model()).scaled(rank);
    for (const auto& c : comp) e = e + c;
    return e;
}

nlohmann::json ChernCharacter::to_json() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : comp) {
        nlohmann::json v = nlohmann::json::array();
        for (const auto& r : c.coeff()) v.push_back(dump_rational(r));
        comps.push_back(v);
    }
    return {{"rank", dump_rational(rank)}, {"components", comps}};
}

ChernCharacter ChernCharacter::from_json(const nlohmann::json& j,
                                         const CohomologyModel& model) {
    ChernCharacter ch;
    ch.rank = parse_rational(j.at("rank"));
    int jdeg = 0;
    for (const auto& comp : j.at("components")) {
        ++jdeg;
        std::vector<Rational> c;
        for (const auto& e : comp) c.push_back(parse_rational(e));
        Element el(&model, std::move(c));
        for (std::size_t i = 0; i < model.size(); ++i)
            if (el[i] != 0 && model.degree(i) != 2 * jdeg)
                throw PreconditionError("chern character: component degree mismatch");
        ch.comp.push_back(std::move(el));
    }
    if (static_cast<int>(ch.comp.size()) != model.half_dim())
        throw PreconditionError("chern character: need one component per even degree");
    return ch;
}

ChernCharacter adams(const ChernCharacter& ch, unsigned k) {
    ChernCharacter out = ch;
    Rational kj = 1;
    for (std::size_t j = 0; j < out.comp.size(); ++j) {
        kj *= static_cast<int>(k);
        out.comp[j] = ch.comp[j].scaled(kj);
    }
    return out;
}

ChernCharacter adams_multi(const ChernCharacter& ch, const std::vector<unsigned>& k) {
    const CohomologyModel& model = *ch.model();
    const int m = model.half_dim();
    if (static_cast<int>(k.size()) != m)
        throw PreconditionError("adams_multi: need one index per factor");
    Element prod = Element::unit(model);
    Rational rank = 1;
    for (unsigned ki : k) {
        prod = prod * adams(ch, ki).mixed();
        rank *= ch.rank;
    }
    ChernCharacter out;
    out.rank = rank;
    for (int j = 1; j <= m; ++j) out.comp.push_back(prod.part(2 * j));
    return out;
}

namespace {

/// Compositions gamma of m into m nonnegative parts, in lexicographic order.
void compositions(int m, int parts, std::vector<unsigned>& cur,
                  const std::function<void(const std::vector<unsigned>&)>& fn) {
    if (parts == 1) {
        cur.push_back(static_cast<unsigned>(m));
        fn(cur);
        cur.pop_back();
        return;
    }
    for (int v = 0; v <= m; ++v) {
        cur.push_back(static_cast<unsigned>(v));
        compositions(m - v, parts - 1, cur, fn);
        cur.pop_back();
    }
}

} // namespace

bool admissible(const ChernCharacter& ch) {
    const CohomologyModel& model = *ch.model();
    const int m = model.half_dim();
    bool found = false;
    std::vector<unsigned> cur;
    std::function<void(const std::vector<unsigned>&)> fn =
        [&](const std::vector<unsigned>& gamma) {
            if (found) return;
            Element prod = Element::unit(model);
            for (unsigned g : gamma)
                prod = g == 0 ? prod.scaled(ch.rank) : prod * ch.comp[g - 1];
            if (prod.integrate() != 0) found = true;
        };
    compositions(m, m, cur, fn);
    return found;
}

Rational pairing_value(const Element& omega, const ChernCharacter& ch,
                       const std::vector<unsigned>& k) {
    ChernCharacter psi = adams_multi(ch, k);
    Element diff = psi.mixed() + Element::unit(*ch.model()).scaled(-psi.rank);
    return (omega * diff).integrate();
}

GridSearchResult nonvanishing_grid_search(const Element& omega, const ChernCharacter& ch) {
    const CohomologyModel& model = *ch.model();
    const int m = model.half_dim();
    {
        // omega must have unit degree-0 part
        Element unit_part = omega.part(0);
        if (!(unit_part + Element::unit(model).scaled(-1)).is_zero())
            throw PreconditionError("grid search: omega must have unit degree-0 part");
    }
    if (!admissible(ch))
        throw PreconditionError(
            "grid search: character is inadmissible (needs at least one nontrivial "
            "character number)");

    std::vector<unsigned> k(m, 0);
    while (true) {
        Rational v = pairing_value(omega, ch, k);
        if (v != 0) return {k, v};
        // lexicographic increment over {0..m}^m
        int pos = m - 1;
        while (pos >= 0 && k[pos] == static_cast<unsigned>(m)) {
            k[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++k[pos];
    }
    // admissibility guarantees a hit; reaching this line is a bug
    throw std::logic_error(
        "grid search exhausted despite admissibility: pairing algebra is broken");
}

TotalChernResult total_ch_nonzero(const ChernCharacter& ch) {
    GridSearchResult r = nonvanishing_grid_search(Element::unit(*ch.model()), ch);
    return {r.k, r.value, r.value > 0 ? 1 : -1};
}

GridPolynomial interpolate_grid_polynomial(const Element& omega, const ChernCharacter& ch) {
    const CohomologyModel& model = *ch.model();
    const int m = model.half_dim();

    // monomials of total degree <= m in m variables
    GridPolynomial out;
    std::vector<unsigned> cur;
    std::function<void(int, int)> gen = [&](int pos, int left) {
        if (pos == m) {
            out.monomials.push_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur.push_back(static_cast<unsigned>(v));
            gen(pos + 1, left - v);
            cur.pop_back();
        }
    };
    gen(0, m);

    // grid points and values
    std::vector<std::vector<unsigned>> pts;
    std::vector<unsigned> k(m, 0);
    while (true) {
        pts.push_back(k);
        int pos = m - 1;
        while (pos >= 0 && k[pos] == static_cast<unsigned>(m)) {
            k[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++k[pos];
    }
    const std::size_t rows = pts.size(), cols = out.monomials.size();
    std::vector<std::vector<Rational>> A(rows, std::vector<Rational>(cols + 1, Rational(0)));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            Rational v = 1;
            for (int i = 0; i < m; ++i)
                for (unsigned e = 0; e < out.monomials[c][i]; ++e)
                    v *= static_cast<int>(pts[r][i]);
            A[r][c] = v;
        }
        A[r][cols] = pairing_value(omega, ch, pts[r]);
    }

    // rational Gaussian elimination on the augmented system
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && A[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(A[rank], A[piv]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || A[r][c] == 0) continue;
            Rational f = A[r][c] / A[rank][c];
            for (std::size_t cc = c; cc <= cols; ++cc) A[r][cc] -= f * A[rank][cc];
        }
        ++rank;
    }
    // consistency: no row 0 = nonzero
    out.consistent = true;
    for (std::size_t r = 0; r < rows; ++r) {
        bool zero_row = true;
        for (std::size_t c = 0; c < cols; ++c)
            if (A[r][c] != 0) zero_row = false;
        if (zero_row && A[r][cols] != 0) out.consistent = false;
    }
    if (out.consistent) {
        out.coeffs.assign(cols, Rational(0));
        std::size_t rr = 0;
        for (std::size_t c = 0; c < cols && rr < rows; ++c) {
            // find the pivot row for this column
            for (std::size_t r = 0; r < rows; ++r) {
                bool is_pivot = A[r][c] != 0;
                for (std::size_t cc = 0; cc < c && is_pivot; ++cc)
                    if (A[r][cc] != 0) is_pivot = false;
                if (is_pivot) {
                    bool leading = true;
                    for (std::size_t r2 = 0; r2 < rows; ++r2)
                        if (r2 != r && A[r2][c] != 0) leading = false;
                    if (leading) out.coeffs[c] = A[r][cols] / A[r][c];
                    break;
                }
            }
        }
        out.zero = std::all_of(out.coeffs.begin(), out.coeffs.end(),
                               [](const Rational& x) { return x == 0; });
        // exactness: re-evaluate all grid points through the fit
        for (std::size_t r = 0; r < pts.size() && out.consistent; ++r) {
            Rational v = 0;
            for (std::size_t c = 0; c < cols; ++c) {
                Rational mono = 1;
                for (int i = 0; i < m; ++i)
                    for (unsigned e = 0; e < out.monomials[c][i]; ++e)
                        mono *= static_cast<int>(pts[r][i]);
                v += out.coeffs[c] * mono;
            }
            if (v != pairing_value(omega, ch, pts[r])) out.consistent = false;
        }
    }
    return out;
}

KunnethResult kunneth_product(const ChernCharacter& chN, const ChernCharacter& chM) {
    const CohomologyModel& a = *chN.model();
    const CohomologyModel& b = *chM.model();
    KunnethResult out{std::make_shared<CohomologyModel>(CohomologyModel::tensor(a, b)),
                      Element(), Rational(0), Rational(0)};
    const CohomologyModel& prod = *out.model;

    // push both mixed characters into the tensor model and multiply
    auto embed_left = [&](const Element& e) {
        Element r = Element::zero(prod);
        Element unit_b = Element::unit(b);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                r[i * b.size() + j] = e[i] * unit_b[j];
        return r;
    };
    auto embed_right = [&](const Element& e) {
        Element r = Element::zero(prod);
        Element unit_a = Element::unit(a);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                r[i * b.size() + j] = unit_a[i] * e[j];
        return r;
    };
    out.mixed = embed_left(chN.mixed()) * embed_right(chM.mixed());
    out.integral = out.mixed.integrate();
    out.factor_product = chN.mixed().integrate() * chM.mixed().integrate();
    return out;
}

} // namespace collarcurv
