#include "spt/symexpr.hpp"

#include "spt/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace spt {

GVar::GVar(int order_, int deriv_) : order(order_), deriv(deriv_) {
    if (order_ < 1 || deriv_ < 0)
        throw Error(ErrorCategory::argument_range,
                    "GVar requires order >= 1 and deriv >= 0, got (" + std::to_string(order_) + ", " +
                        std::to_string(deriv_) + ")");
}

// ---------------------------------------------------------------------------
// GMonomial

GMonomial::GMonomial(GVar v, int exponent) {
    if (exponent < 0)
        throw Error(ErrorCategory::argument_range, "negative exponent in monomial");
    if (exponent > 0) factors_.emplace_back(v, exponent);
}

int GMonomial::degree() const {
    int d = 0;
    for (const auto& [v, e] : factors_) d += e;
    return d;
}

int GMonomial::weighted_order() const {
    int d = 0;
    for (const auto& [v, e] : factors_) d += v.order * e;
    return d;
}

int GMonomial::exponent_of(GVar v) const {
    auto it = std::lower_bound(factors_.begin(), factors_.end(), v,
                               [](const Factor& f, const GVar& x) { return f.first < x; });
    return (it != factors_.end() && it->first == v) ? it->second : 0;
}

GMonomial GMonomial::operator*(const GMonomial& rhs) const {
    GMonomial out;
    out.factors_.reserve(factors_.size() + rhs.factors_.size());
    auto a = factors_.begin();
    auto b = rhs.factors_.begin();
    while (a != factors_.end() || b != rhs.factors_.end()) {
        if (b == rhs.factors_.end() || (a != factors_.end() && a->first < b->first)) {
            out.factors_.push_back(*a++);
        } else if (a == factors_.end() || b->first < a->first) {
            out.factors_.push_back(*b++);
        } else {
            out.factors_.emplace_back(a->first, a->second + b->second);
            ++a;
            ++b;
        }
    }
    return out;
}

GMonomial GMonomial::without_one(GVar v) const {
    GMonomial out = *this;
    for (auto it = out.factors_.begin(); it != out.factors_.end(); ++it) {
        if (it->first == v) {
            if (--it->second == 0) out.factors_.erase(it);
            return out;
        }
    }
    assert(false && "without_one: variable not present");
    return out;
}

std::strong_ordering GMonomial::operator<=>(const GMonomial& rhs) const {
    if (auto c = degree() <=> rhs.degree(); c != 0) return c;
    return std::lexicographical_compare_three_way(
        factors_.begin(), factors_.end(), rhs.factors_.begin(), rhs.factors_.end(),
        [](const Factor& x, const Factor& y) {
            if (auto c = x.first <=> y.first; c != 0) return c;
            return x.second <=> y.second;
        });
}

// ---------------------------------------------------------------------------
// GExpression

GExpression::GExpression(const Rational& constant) {
    if (constant != 0) terms_.emplace(GMonomial{}, constant);
}

GExpression::GExpression(int constant) : GExpression(Rational(constant)) {}

GExpression::GExpression(GVar v) { terms_.emplace(GMonomial(v), Rational(1)); }

GExpression::GExpression(const GMonomial& m, const Rational& coeff) {
    if (coeff != 0) terms_.emplace(m, coeff);
}

Rational GExpression::coefficient(const GMonomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
}

std::set<GVar> GExpression::variables() const {
    std::set<GVar> out;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m.factors()) out.insert(v);
    return out;
}

void GExpression::add_term(const GMonomial& m, const Rational& coeff) {
    if (coeff == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0) terms_.erase(it);
    }
}

GExpression& GExpression::operator+=(const GExpression& rhs) {
    for (const auto& [m, c] : rhs.terms_) add_term(m, c);
    return *this;
}

GExpression& GExpression::operator-=(const GExpression& rhs) {
    for (const auto& [m, c] : rhs.terms_) add_term(m, -c);
    return *this;
}

GExpression& GExpression::operator*=(const Rational& s) {
    if (s == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
}

GExpression operator*(const GExpression& a, const GExpression& b) {
    GExpression out;
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) out.add_term(ma * mb, ca * cb);
    return out;
}

GExpression add(const GExpression& a, const GExpression& b) { return a + b; }
GExpression mul(const GExpression& a, const GExpression& b) { return a * b; }

GExpression power(const GExpression& a, int exponent) {
    if (exponent < 0) throw Error(ErrorCategory::argument_range, "negative power of GExpression");
    GExpression out = GExpression::one();
    for (int i = 0; i < exponent; ++i) out = out * a;
    return out;
}

GExpression differentiate_z(const GExpression& a) {
    GExpression out;
    for (const auto& [m, c] : a.terms()) {
        for (const auto& [v, e] : m.factors()) {
            if (v.order == 1) continue; // G_1(z) = W_00 has no energy denominator
            GMonomial dm = m.without_one(v) * GMonomial(GVar(v.order, v.deriv + 1));
            out.add_term(dm, c * e);
        }
    }
    return out;
}

GExpression differentiate_z(const GExpression& a, int times) {
    if (times < 0) throw Error(ErrorCategory::argument_range, "negative derivative count");
    GExpression out = a;
    for (int i = 0; i < times && !out.is_zero(); ++i) out = differentiate_z(out);
    return out;
}

double evaluate(const GExpression& a, const GBindings& bindings) {
    double sum = 0.0;
    for (const auto& [m, c] : a.terms()) {
        double term = c.convert_to<double>();
        for (const auto& [v, e] : m.factors()) {
            auto it = bindings.find(v);
            if (it == bindings.end())
                throw Error(ErrorCategory::unbound_variable, "unbound variable " + to_string(v));
            term *= std::pow(it->second, e);
        }
        sum += term;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// text rendering

std::string to_string(GVar v) {
    std::string s = "g" + std::to_string(v.order);
    if (v.deriv > 0) s += "^(" + std::to_string(v.deriv) + ")";
    return s;
}

std::string to_string(const Rational& q) {
    std::ostringstream os;
    os << numerator(q);
    if (denominator(q) != 1) os << "/" << denominator(q);
    return os.str();
}

std::string to_string(const GExpression& e) {
    if (e.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : e.terms()) {
        Rational mag = c < 0 ? Rational(-c) : c;
        if (first)
            out += c < 0 ? "-" : "";
        else
            out += c < 0 ? " - " : " + ";
        first = false;

        std::string body;
        for (const auto& [v, p] : m.factors()) {
            if (!body.empty()) body += " ";
            if (p == 1)
                body += to_string(v);
            else if (v.deriv == 0)
                body += to_string(v) + "^" + std::to_string(p);
            else
                body += "(" + to_string(v) + ")^" + std::to_string(p);
        }
        if (body.empty())
            out += to_string(mag);
        else if (mag == 1)
            out += body;
        else
            out += to_string(mag) + " " + body;
    }
    return out;
}

} // namespace spt
