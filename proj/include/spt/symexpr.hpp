#pragma once

// Exact-rational sparse polynomials in the formal variables g_m^(k).
//
// g_m^(k) is the k-th z-derivative (at z = 0) of the m-th order ground-state
// excluded chain sum g_m(z). Expressions are kept in a canonical form so that
// structural equality is polynomial equality.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace spt {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Formal variable g_order^(deriv).
struct GVar {
    int order = 1;
    int deriv = 0;

    GVar() = default;
    GVar(int order_, int deriv_ = 0);

    auto operator<=>(const GVar&) const = default;
};

/// Product of powers of GVars. Factors are sorted by GVar, exponents > 0.
class GMonomial {
public:
    using Factor = std::pair<GVar, int>;

    GMonomial() = default;
    explicit GMonomial(GVar v, int exponent = 1);

    const std::vector<Factor>& factors() const { return factors_; }
    bool is_one() const { return factors_.empty(); }

    /// Sum of exponents.
    int degree() const;
    /// Sum of order * exponent; the perturbative order of the monomial.
    int weighted_order() const;
    int exponent_of(GVar v) const;

    GMonomial operator*(const GMonomial& rhs) const;
    /// Returns this monomial with one power of `v` removed. Requires exponent_of(v) > 0.
    GMonomial without_one(GVar v) const;

    bool operator==(const GMonomial&) const = default;
    /// Graded order: total degree first, then the sorted factor list.
    std::strong_ordering operator<=>(const GMonomial& rhs) const;

private:
    std::vector<Factor> factors_;
};

class GExpression {
public:
    using TermMap = std::map<GMonomial, Rational>;

    GExpression() = default;
    GExpression(const Rational& constant);
    GExpression(int constant);
    GExpression(GVar v);
    GExpression(const GMonomial& m, const Rational& coeff = 1);

    static GExpression zero() { return {}; }
    static GExpression one() { return GExpression(1); }

    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    /// Coefficient of `m`, zero when absent.
    Rational coefficient(const GMonomial& m) const;
    std::set<GVar> variables() const;

    GExpression& operator+=(const GExpression& rhs);
    GExpression& operator-=(const GExpression& rhs);
    GExpression& operator*=(const Rational& s);

    friend GExpression operator+(GExpression a, const GExpression& b) { return a += b; }
    friend GExpression operator-(GExpression a, const GExpression& b) { return a -= b; }
    friend GExpression operator-(GExpression a) { return a *= Rational(-1); }
    friend GExpression operator*(const GExpression& a, const GExpression& b);
    friend GExpression operator*(GExpression a, const Rational& s) { return a *= s; }
    friend GExpression operator*(const Rational& s, GExpression a) { return a *= s; }

    bool operator==(const GExpression&) const = default;

    /// Accumulates coeff * m without temporaries.
    void add_term(const GMonomial& m, const Rational& coeff);

private:
    TermMap terms_;
};

GExpression add(const GExpression& a, const GExpression& b);
GExpression mul(const GExpression& a, const GExpression& b);
GExpression power(const GExpression& a, int exponent);

/// Formal d/dz with d g_m^(k) = g_m^(k+1), except g_1 which is z-independent.
GExpression differentiate_z(const GExpression& a);
/// `times` repeated applications of differentiate_z.
GExpression differentiate_z(const GExpression& a, int times);

using GBindings = std::map<GVar, double>;

/// Numeric value; throws spt::Error (unbound_variable) naming the first missing GVar.
double evaluate(const GExpression& a, const GBindings& bindings);

std::string to_string(GVar v);
std::string to_string(const Rational& q);
/// Canonical text, e.g. "g3 + g1 g2^(1)" or "-1/2 g1^2 g2^(2)"; "0" for zero.
std::string to_string(const GExpression& e);

} // namespace spt
