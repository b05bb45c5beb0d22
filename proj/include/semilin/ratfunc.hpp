/*
   Copyright 2026 The semilin Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

        http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#ifndef SEMILIN_RATFUNC_HPP
#define SEMILIN_RATFUNC_HPP

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <semilin/error.hpp>
#include <semilin/scalar.hpp>

namespace semilin
{

using Exponents = std::vector<unsigned>;

/// Graded lexicographic order: total degree first, then lexicographic with x1
/// most significant.
struct GrlexLess
{
    bool operator()(const Exponents &a, const Exponents &b) const
    {
        const auto da = std::accumulate(a.begin(), a.end(), 0U);
        const auto db = std::accumulate(b.begin(), b.end(), 0U);
        if (da != db) {
            return da < db;
        }
        return a < b;
    }
};

/// Polynomial in x1..xn over a Scalar field. Zero coefficients are never stored.
class MultiPoly
{
public:
    using TermMap = std::map<Exponents, Scalar, GrlexLess>;

    MultiPoly() = default;
    MultiPoly(const FieldDescriptor &f, std::size_t nvars) : field_(f), nvars_(nvars) {}

    static MultiPoly constant(const FieldDescriptor &f, std::size_t nvars, const Scalar &c)
    {
        MultiPoly p(f, nvars);
        p.add_term(Exponents(nvars, 0), c);
        return p;
    }
    static MultiPoly constant(const FieldDescriptor &f, std::size_t nvars, long c)
    {
        return constant(f, nvars, Scalar(f, c));
    }
    /// x_{i+1} (variables are 0-indexed internally).
    static MultiPoly variable(const FieldDescriptor &f, std::size_t nvars, std::size_t i)
    {
        if (i >= nvars) {
            throw PreconditionViolated("variable x" + std::to_string(i + 1) + " out of range for "
                                       + std::to_string(nvars) + " variables");
        }
        MultiPoly p(f, nvars);
        Exponents e(nvars, 0);
        e[i] = 1;
        p.add_term(e, Scalar(f, 1L));
        return p;
    }

    const FieldDescriptor &field() const noexcept { return field_; }
    std::size_t nvars() const noexcept { return nvars_; }
    const TermMap &terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    bool is_constant() const
    {
        return terms_.empty() || (terms_.size() == 1 && total_degree() == 0);
    }
    /// Constant term (zero when absent).
    Scalar constant_term() const
    {
        const auto it = terms_.find(Exponents(nvars_, 0));
        return it == terms_.end() ? Scalar(field_) : it->second;
    }

    void add_term(const Exponents &e, const Scalar &c)
    {
        if (e.size() != nvars_) {
            throw DimMismatch("monomial with " + std::to_string(e.size()) + " exponents in a polynomial of "
                              + std::to_string(nvars_) + " variables");
        }
        if (c.is_zero()) {
            return;
        }
        auto [it, fresh] = terms_.emplace(e, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) {
                terms_.erase(it);
            }
        }
    }

    unsigned total_degree() const
    {
        if (terms_.empty()) {
            return 0;
        }
        const auto &e = terms_.rbegin()->first;
        return std::accumulate(e.begin(), e.end(), 0U);
    }
    unsigned degree_in(std::size_t v) const
    {
        unsigned d = 0;
        for (const auto &[e, c] : terms_) {
            d = std::max(d, e[v]);
        }
        return d;
    }
    bool involves(std::size_t v) const { return degree_in(v) > 0; }

    /// Leading term in grlex order; requires a nonzero polynomial.
    const std::pair<const Exponents, Scalar> &leading() const
    {
        if (terms_.empty()) {
            throw IndistinguishableFromZero("leading term of the zero polynomial");
        }
        return *terms_.rbegin();
    }

    MultiPoly scaled(const Scalar &s) const
    {
        MultiPoly r(field_, nvars_);
        if (s.is_zero()) {
            return r;
        }
        for (const auto &[e, c] : terms_) {
            r.terms_.emplace_hint(r.terms_.end(), e, c * s);
        }
        return r;
    }
    MultiPoly times_monomial(const Exponents &m, const Scalar &s) const
    {
        MultiPoly r(field_, nvars_);
        for (const auto &[e, c] : terms_) {
            Exponents x = e;
            for (std::size_t i = 0; i < nvars_; ++i) {
                x[i] += m[i];
            }
            r.add_term(x, c * s);
        }
        return r;
    }

    MultiPoly &operator+=(const MultiPoly &o)
    {
        check(o);
        for (const auto &[e, c] : o.terms_) {
            add_term(e, c);
        }
        return *this;
    }
    MultiPoly &operator-=(const MultiPoly &o)
    {
        check(o);
        for (const auto &[e, c] : o.terms_) {
            add_term(e, -c);
        }
        return *this;
    }
    friend MultiPoly operator+(MultiPoly a, const MultiPoly &b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly &b) { return a -= b; }
    MultiPoly operator-() const { return scaled(Scalar(field_, -1L)); }
    friend MultiPoly operator*(const MultiPoly &a, const MultiPoly &b)
    {
        a.check(b);
        MultiPoly r(a.field_, a.nvars_);
        for (const auto &[ea, ca] : a.terms_) {
            for (const auto &[eb, cb] : b.terms_) {
                Exponents e = ea;
                for (std::size_t i = 0; i < e.size(); ++i) {
                    e[i] += eb[i];
                }
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }

    MultiPoly pow(unsigned k) const
    {
        MultiPoly r = constant(field_, nvars_, 1L), b = *this;
        while (k > 0) {
            if (k & 1U) {
                r = r * b;
            }
            b = b * b;
            k >>= 1U;
        }
        return r;
    }

    MultiPoly derivative(std::size_t v) const
    {
        MultiPoly r(field_, nvars_);
        for (const auto &[e, c] : terms_) {
            if (e[v] == 0) {
                continue;
            }
            Exponents x = e;
            --x[v];
            r.add_term(x, c * Scalar(field_, static_cast<long>(e[v])));
        }
        return r;
    }

    /// Value at a point of k^n.
    Scalar evaluate(const std::vector<Scalar> &pt) const
    {
        Scalar acc(field_);
        for (const auto &[e, c] : terms_) {
            Scalar t = c;
            for (std::size_t i = 0; i < nvars_; ++i) {
                t *= pt.at(i).pow(static_cast<long>(e[i]));
            }
            acc += t;
        }
        return acc;
    }

    friend bool operator==(const MultiPoly &a, const MultiPoly &b)
    {
        return a.nvars_ == b.nvars_ && a.field_ == b.field_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const MultiPoly &a, const MultiPoly &b) { return !(a == b); }

    /// Highest-degree terms first, e.g. "x1^2 - 3*x1*x2 + 1/2".
    std::string to_string() const
    {
        if (terms_.empty()) {
            return "0";
        }
        std::ostringstream os;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto &[e, c] = *it;
            std::string cs = c.to_string();
            const bool compound = !c.is_rational() && cs.find_first_of("+-", 1) != std::string::npos;
            bool neg = c.is_rational() && sgn(c.rational_part()) < 0;
            if (neg) {
                cs = cs.substr(1);
            }
            if (compound) {
                cs = "(" + cs + ")";
            }
            if (first) {
                os << (neg ? "-" : "");
            } else {
                os << (neg ? " - " : " + ");
            }
            first = false;
            std::string mono;
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (e[i] == 0) {
                    continue;
                }
                mono += (mono.empty() ? "" : "*") + ("x" + std::to_string(i + 1));
                if (e[i] > 1) {
                    mono += "^" + std::to_string(e[i]);
                }
            }
            if (mono.empty()) {
                os << cs;
            } else if (cs == "1") {
                os << mono;
            } else {
                os << cs << "*" << mono;
            }
        }
        return os.str();
    }

private:
    void check(const MultiPoly &o) const
    {
        if (nvars_ != o.nvars_) {
            throw DimMismatch("polynomials in " + std::to_string(nvars_) + " and " + std::to_string(o.nvars_)
                              + " variables");
        }
        if (field_ != o.field_) {
            throw FieldMismatch("polynomial fields differ: " + field_.name() + " vs " + o.field_.name());
        }
    }

    FieldDescriptor field_;
    std::size_t nvars_ = 0;
    TermMap terms_;
};

namespace detail
{

// a / b when b divides a exactly, by grlex leading-term division.
inline std::optional<MultiPoly> divide_exact(MultiPoly a, const MultiPoly &b)
{
    if (b.is_zero()) {
        throw DivisionByZero("polynomial division by zero");
    }
    const auto &[lb, cb] = b.leading();
    const Scalar cbi = cb.inverse();
    MultiPoly q(a.field(), a.nvars());
    while (!a.is_zero()) {
        const auto &[la, ca] = a.leading();
        Exponents m(a.nvars());
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (la[i] < lb[i]) {
                return std::nullopt;
            }
            m[i] = la[i] - lb[i];
        }
        const Scalar c = ca * cbi;
        q.add_term(m, c);
        a -= b.times_monomial(m, c);
    }
    return q;
}

// Coefficients of p as a polynomial in x_v.
inline std::map<unsigned, MultiPoly> split_in(const MultiPoly &p, std::size_t v)
{
    std::map<unsigned, MultiPoly> out;
    for (const auto &[e, c] : p.terms()) {
        Exponents x = e;
        x[v] = 0;
        auto [it, fresh] = out.try_emplace(e[v], p.field(), p.nvars());
        it->second.add_term(x, c);
    }
    return out;
}

inline MultiPoly monic(const MultiPoly &p)
{
    return p.is_zero() ? p : p.scaled(p.leading().second.inverse());
}

inline std::optional<std::size_t> main_variable(const MultiPoly &a, const MultiPoly &b)
{
    for (std::size_t v = a.nvars(); v-- > 0;) {
        if (a.involves(v) || b.involves(v)) {
            return v;
        }
    }
    return std::nullopt;
}

inline MultiPoly poly_gcd(const MultiPoly &a, const MultiPoly &b);

// gcd of the coefficients of p in x_v.
inline MultiPoly content_in(const MultiPoly &p, std::size_t v)
{
    MultiPoly g(p.field(), p.nvars());
    for (const auto &[d, c] : split_in(p, v)) {
        g = poly_gcd(g, c);
        if (g.is_constant() && !g.is_zero()) {
            break;
        }
    }
    return g;
}

inline MultiPoly prem_in(MultiPoly a, const MultiPoly &b, std::size_t v)
{
    const unsigned db = b.degree_in(v);
    const MultiPoly lb = split_in(b, v).rbegin()->second;
    while (!a.is_zero() && a.degree_in(v) >= db) {
        const unsigned da = a.degree_in(v);
        const MultiPoly la = split_in(a, v).rbegin()->second;
        Exponents shift(a.nvars(), 0);
        shift[v] = da - db;
        a = a * lb - (la * b).times_monomial(shift, Scalar(a.field(), 1L));
    }
    return a;
}

// p with every variable except x_v set to pt.
inline MultiPoly specialize_except(const MultiPoly &p, std::size_t v, const std::vector<Scalar> &pt)
{
    MultiPoly r(p.field(), p.nvars());
    for (const auto &[e, c] : p.terms()) {
        Scalar k = c;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (i != v && e[i] > 0) {
                k *= pt[i].pow(static_cast<long>(e[i]));
            }
        }
        Exponents x(p.nvars(), 0);
        x[v] = e[v];
        r.add_term(x, k);
    }
    return r;
}

// True only when a and b are provably coprime: for each shared variable a
// specialization of the others that keeps both degrees in it gives a constant
// univariate gcd, so every common factor has degree zero in every variable.
inline bool certified_coprime(const MultiPoly &a, const MultiPoly &b)
{
    std::size_t used = 0;
    for (std::size_t v = 0; v < a.nvars(); ++v) {
        used += (a.involves(v) || b.involves(v)) ? 1 : 0;
    }
    if (used < 2) {
        return false;
    }
    for (std::size_t v = 0; v < a.nvars(); ++v) {
        if (!a.involves(v) || !b.involves(v)) {
            continue;
        }
        bool ok = false;
        for (long attempt = 0; attempt < 4 && !ok; ++attempt) {
            std::vector<Scalar> pt;
            for (std::size_t i = 0; i < a.nvars(); ++i) {
                pt.emplace_back(a.field(), static_cast<long>(2 + 3 * i + 5 * attempt));
            }
            const MultiPoly sa = specialize_except(a, v, pt), sb = specialize_except(b, v, pt);
            if (sa.degree_in(v) != a.degree_in(v) || sb.degree_in(v) != b.degree_in(v)) {
                continue;
            }
            if (!poly_gcd(sa, sb).is_constant()) {
                return false;
            }
            ok = true;
        }
        if (!ok) {
            return false;
        }
    }
    return true;
}

// Monic gcd by recursion on the main variable: gcd of contents times the
// primitive part of the last nonzero primitive pseudo-remainder.
inline MultiPoly poly_gcd(const MultiPoly &a, const MultiPoly &b)
{
    if (a.is_zero()) {
        return monic(b);
    }
    if (b.is_zero()) {
        return monic(a);
    }
    if (a.is_constant() || b.is_constant()) {
        return MultiPoly::constant(a.field(), a.nvars(), 1L);
    }
    if (certified_coprime(a, b)) {
        return MultiPoly::constant(a.field(), a.nvars(), 1L);
    }
    const auto v = main_variable(a, b);
    if (!v) {
        return MultiPoly::constant(a.field(), a.nvars(), 1L);
    }
    if (!a.involves(*v)) {
        return poly_gcd(a, content_in(b, *v));
    }
    if (!b.involves(*v)) {
        return poly_gcd(content_in(a, *v), b);
    }
    const MultiPoly ca = content_in(a, *v), cb = content_in(b, *v);
    // scalar normalization keeps the rational coefficients from growing
    MultiPoly r0 = monic(*divide_exact(a, ca)), r1 = monic(*divide_exact(b, cb));
    if (r0.degree_in(*v) < r1.degree_in(*v)) {
        std::swap(r0, r1);
    }
    while (r1.involves(*v)) {
        MultiPoly r = prem_in(r0, r1, *v);
        if (r.is_zero()) {
            break;
        }
        r0 = std::move(r1);
        r1 = monic(*divide_exact(r, content_in(r, *v)));
    }
    const MultiPoly g = r1.involves(*v) ? r1 : MultiPoly::constant(a.field(), a.nvars(), 1L);
    return monic(poly_gcd(ca, cb) * g);
}

} // namespace detail

/// Quotient of polynomials, kept in lowest terms with a monic denominator
/// (leading grlex coefficient 1).
class RationalFunction
{
public:
    RationalFunction() = default;
    RationalFunction(const MultiPoly &num) : num_(num), den_(MultiPoly::constant(num.field(), num.nvars(), 1L)) {}
    RationalFunction(MultiPoly num, MultiPoly den) : num_(std::move(num)), den_(std::move(den))
    {
        if (den_.is_zero()) {
            throw DivisionByZero("rational function with zero denominator");
        }
        normalize();
    }

    static RationalFunction constant(const FieldDescriptor &f, std::size_t nvars, const Scalar &c)
    {
        return MultiPoly::constant(f, nvars, c);
    }
    static RationalFunction constant(const FieldDescriptor &f, std::size_t nvars, long c)
    {
        return MultiPoly::constant(f, nvars, c);
    }
    static RationalFunction variable(const FieldDescriptor &f, std::size_t nvars, std::size_t i)
    {
        return MultiPoly::variable(f, nvars, i);
    }

    const MultiPoly &numerator() const noexcept { return num_; }
    const MultiPoly &denominator() const noexcept { return den_; }
    const FieldDescriptor &field() const noexcept { return num_.field(); }
    std::size_t nvars() const noexcept { return num_.nvars(); }
    bool is_zero() const noexcept { return num_.is_zero(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }

    friend RationalFunction operator+(const RationalFunction &a, const RationalFunction &b)
    {
        if (a.den_ == b.den_) {
            return {a.num_ + b.num_, a.den_};
        }
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend RationalFunction operator-(const RationalFunction &a, const RationalFunction &b)
    {
        if (a.den_ == b.den_) {
            return {a.num_ - b.num_, a.den_};
        }
        return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    RationalFunction operator-() const { return {-num_, den_}; }
    friend RationalFunction operator*(const RationalFunction &a, const RationalFunction &b)
    {
        if (a.is_zero() || b.is_zero()) {
            return constant(a.field(), a.nvars(), 0L);
        }
        // both operands are reduced, so only cross factors can cancel
        const MultiPoly g1 = detail::poly_gcd(a.num_, b.den_);
        const MultiPoly g2 = detail::poly_gcd(b.num_, a.den_);
        const auto cut = [](const MultiPoly &p, const MultiPoly &g) {
            return g.is_constant() ? p : *detail::divide_exact(p, g);
        };
        return reduced(cut(a.num_, g1) * cut(b.num_, g2), cut(a.den_, g2) * cut(b.den_, g1));
    }
    friend RationalFunction operator/(const RationalFunction &a, const RationalFunction &b)
    {
        if (b.is_zero()) {
            throw DivisionByZero("division by the zero rational function");
        }
        return {a.num_ * b.den_, a.den_ * b.num_};
    }
    RationalFunction inverse() const { return constant(field(), nvars(), 1L) / *this; }

    RationalFunction pow(long k) const
    {
        if (k < 0) {
            return inverse().pow(-k);
        }
        return reduced(num_.pow(static_cast<unsigned>(k)), den_.pow(static_cast<unsigned>(k)));
    }

    /// Value at a point of k^n; nullopt at a pole.
    std::optional<Scalar> evaluate(const std::vector<Scalar> &pt) const
    {
        const Scalar d = den_.evaluate(pt);
        if (d.is_zero()) {
            return std::nullopt;
        }
        return num_.evaluate(pt) / d;
    }

    RationalFunction derivative(std::size_t v) const
    {
        return {num_.derivative(v) * den_ - num_ * den_.derivative(v), den_ * den_};
    }

    /// Cross-multiplication equality.
    friend bool operator==(const RationalFunction &a, const RationalFunction &b)
    {
        return a.num_ * b.den_ == b.num_ * a.den_;
    }
    friend bool operator!=(const RationalFunction &a, const RationalFunction &b) { return !(a == b); }

    std::string to_string() const
    {
        const std::string n = num_.to_string();
        if (den_.is_constant()) {
            return n;
        }
        const auto wrap = [](const MultiPoly &p, std::string s) {
            return p.terms().size() > 1 ? "(" + s + ")" : s;
        };
        return wrap(num_, n) + "/" + wrap(den_, den_.to_string());
    }

private:
    // num/den already coprime; only the denominator is made monic.
    static RationalFunction reduced(MultiPoly num, MultiPoly den)
    {
        RationalFunction r;
        r.num_ = std::move(num);
        r.den_ = std::move(den);
        r.make_monic();
        return r;
    }

    void make_monic()
    {
        if (num_.is_zero()) {
            den_ = MultiPoly::constant(num_.field(), num_.nvars(), 1L);
            return;
        }
        const Scalar lc = den_.leading().second;
        if (!lc.is_one()) {
            const Scalar inv = lc.inverse();
            num_ = num_.scaled(inv);
            den_ = den_.scaled(inv);
        }
    }

    void normalize()
    {
        if (num_.is_zero()) {
            den_ = MultiPoly::constant(num_.field(), num_.nvars(), 1L);
            return;
        }
        const MultiPoly g = detail::poly_gcd(num_, den_);
        if (!g.is_constant()) {
            num_ = *detail::divide_exact(num_, g);
            den_ = *detail::divide_exact(den_, g);
        }
        make_monic();
    }

    MultiPoly num_;
    MultiPoly den_;
};

namespace detail
{

// p(images) as a fraction whose denominator is prod b_i^{deg_i p}, images a_i/b_i.
inline std::pair<MultiPoly, std::vector<unsigned>> substitute_cleared(const MultiPoly &p,
                                                                      const std::vector<RationalFunction> &images,
                                                                      std::size_t out_vars)
{
    const FieldDescriptor &f = p.field();
    std::vector<unsigned> deg(p.nvars());
    for (std::size_t i = 0; i < p.nvars(); ++i) {
        deg[i] = p.degree_in(i);
    }
    // powers of numerators and denominators, computed once
    std::vector<std::vector<MultiPoly>> apow(p.nvars()), bpow(p.nvars());
    for (std::size_t i = 0; i < p.nvars(); ++i) {
        apow[i].push_back(MultiPoly::constant(f, out_vars, 1L));
        bpow[i].push_back(MultiPoly::constant(f, out_vars, 1L));
        for (unsigned k = 1; k <= deg[i]; ++k) {
            apow[i].push_back(apow[i].back() * images[i].numerator());
            bpow[i].push_back(bpow[i].back() * images[i].denominator());
        }
    }
    MultiPoly acc(f, out_vars);
    for (const auto &[e, c] : p.terms()) {
        MultiPoly t = MultiPoly::constant(f, out_vars, c);
        for (std::size_t i = 0; i < p.nvars(); ++i) {
            t = t * apow[i][e[i]] * bpow[i][deg[i] - e[i]];
        }
        acc += t;
    }
    return {acc, deg};
}

// p(a_i/b) * b^{deg p} when every image has the same denominator b.
inline MultiPoly substitute_common(const MultiPoly &p, const std::vector<RationalFunction> &images,
                                   const MultiPoly &b, unsigned total, std::size_t out_vars)
{
    const FieldDescriptor &f = p.field();
    std::vector<std::vector<MultiPoly>> apow(p.nvars());
    for (std::size_t i = 0; i < p.nvars(); ++i) {
        apow[i].push_back(MultiPoly::constant(f, out_vars, 1L));
        for (unsigned k = 1, d = p.degree_in(i); k <= d; ++k) {
            apow[i].push_back(apow[i].back() * images[i].numerator());
        }
    }
    std::vector<MultiPoly> bpow{MultiPoly::constant(f, out_vars, 1L)};
    for (unsigned k = 1; k <= total; ++k) {
        bpow.push_back(bpow.back() * b);
    }
    MultiPoly acc(f, out_vars);
    for (const auto &[e, c] : p.terms()) {
        MultiPoly t = MultiPoly::constant(f, out_vars, c);
        unsigned used = 0;
        for (std::size_t i = 0; i < p.nvars(); ++i) {
            if (e[i] > 0) {
                t = t * apow[i][e[i]];
                used += e[i];
            }
        }
        acc += t * bpow[total - used];
    }
    return acc;
}

} // namespace detail

/// f(images): x_i is replaced by images[i]. The images may live in a different
/// number of variables than f.
inline RationalFunction substitute(const RationalFunction &f, const std::vector<RationalFunction> &images)
{
    if (images.size() != f.nvars()) {
        throw DimMismatch("substitution needs " + std::to_string(f.nvars()) + " images, got "
                          + std::to_string(images.size()));
    }
    if (images.empty()) {
        return f;
    }
    const std::size_t out = images.front().nvars();
    for (const auto &im : images) {
        if (im.nvars() != out) {
            throw DimMismatch("substitution images have different numbers of variables");
        }
        if (im.denominator().is_zero()) {
            throw SubstitutionPole("substitution image has a zero denominator");
        }
    }
    const MultiPoly &b0 = images.front().denominator();
    if (images.size() > 1 && !b0.is_constant()
        && std::all_of(images.begin(), images.end(), [&b0](const auto &im) { return im.denominator() == b0; })) {
        const unsigned tn = f.numerator().total_degree(), td = f.denominator().total_degree();
        MultiPoly n = detail::substitute_common(f.numerator(), images, b0, tn, out);
        MultiPoly d = detail::substitute_common(f.denominator(), images, b0, td, out);
        if (d.is_zero()) {
            throw SubstitutionPole("the images land in the pole set of " + f.to_string());
        }
        if (td > tn) {
            n = n * b0.pow(td - tn);
        } else if (tn > td) {
            d = d * b0.pow(tn - td);
        }
        return {n, d};
    }
    auto [n, dn] = detail::substitute_cleared(f.numerator(), images, out);
    auto [d, dd] = detail::substitute_cleared(f.denominator(), images, out);
    if (d.is_zero()) {
        throw SubstitutionPole("the images land in the pole set of " + f.to_string());
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
        const MultiPoly &b = images[i].denominator();
        if (dd[i] > dn[i]) {
            n = n * b.pow(dd[i] - dn[i]);
        } else if (dn[i] > dd[i]) {
            d = d * b.pow(dn[i] - dd[i]);
        }
    }
    // strip common powers of the image denominators before the gcd
    for (const auto &im : images) {
        const MultiPoly &b = im.denominator();
        if (b.is_constant()) {
            continue;
        }
        for (;;) {
            auto qn = detail::divide_exact(n, b);
            if (!qn) {
                break;
            }
            auto qd = detail::divide_exact(d, b);
            if (!qd) {
                break;
            }
            n = std::move(*qn);
            d = std::move(*qd);
        }
    }
    return {n, d};
}

/// Composition of maps given by images: (g o h)_i = g_i(h).
inline std::vector<RationalFunction> compose_maps(const std::vector<RationalFunction> &g,
                                                  const std::vector<RationalFunction> &h)
{
    std::vector<RationalFunction> r;
    r.reserve(g.size());
    for (const auto &gi : g) {
        r.push_back(substitute(gi, h));
    }
    return r;
}

inline std::vector<RationalFunction> identity_map(const FieldDescriptor &f, std::size_t n)
{
    std::vector<RationalFunction> r;
    for (std::size_t i = 0; i < n; ++i) {
        r.push_back(RationalFunction::variable(f, n, i));
    }
    return r;
}

namespace detail
{

inline RationalFunction laplace_det(const std::vector<std::vector<RationalFunction>> &m)
{
    const std::size_t n = m.size();
    if (n == 1) {
        return m[0][0];
    }
    RationalFunction acc = RationalFunction::constant(m[0][0].field(), m[0][0].nvars(), 0L);
    for (std::size_t j = 0; j < n; ++j) {
        if (m[0][j].is_zero()) {
            continue;
        }
        std::vector<std::vector<RationalFunction>> minor;
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<RationalFunction> row;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != j) {
                    row.push_back(m[i][k]);
                }
            }
            minor.push_back(std::move(row));
        }
        const RationalFunction t = m[0][j] * laplace_det(minor);
        acc = (j % 2 == 0) ? acc + t : acc - t;
    }
    return acc;
}

} // namespace detail

/// det(d images_i / d x_j).
inline RationalFunction jacobian_det(const std::vector<RationalFunction> &images)
{
    const std::size_t n = images.size();
    if (n == 0 || images.front().nvars() != n) {
        throw DimMismatch("jacobian_det needs n images in n variables");
    }
    std::vector<std::vector<RationalFunction>> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m[i].push_back(images[i].derivative(j));
        }
    }
    RationalFunction d = detail::laplace_det(m);
    if (d.is_zero()) {
        throw DegenerateMap("jacobian determinant vanishes identically");
    }
    return d;
}

// ---------------------------------------------------------------------------
// Text input.

namespace detail
{

class RfParser
{
public:
    RfParser(std::string_view s, const FieldDescriptor &f, std::size_t nvars) : s_(s), f_(f), n_(nvars) {}

    RationalFunction parse()
    {
        RationalFunction r = expr();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        }
        return r;
    }

private:
    [[noreturn]] void fail(const std::string &what) const
    {
        throw ParseError("rational function \"" + std::string(s_) + "\" at offset " + std::to_string(pos_) + ": "
                         + what);
    }
    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }
    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    RationalFunction expr()
    {
        RationalFunction r = term();
        for (;;) {
            if (eat('+')) {
                r = r + term();
            } else if (eat('-')) {
                r = r - term();
            } else {
                return r;
            }
        }
    }
    RationalFunction term()
    {
        RationalFunction r = unary();
        for (;;) {
            if (eat('*')) {
                r = r * unary();
            } else if (eat('/')) {
                const RationalFunction d = unary();
                if (d.is_zero()) {
                    fail("division by zero");
                }
                r = r / d;
            } else {
                return r;
            }
        }
    }
    RationalFunction unary()
    {
        if (eat('-')) {
            return -unary();
        }
        if (eat('+')) {
            return unary();
        }
        RationalFunction b = atom();
        if (eat('^')) {
            const bool neg = eat('-');
            skip();
            const long e = integer_literal();
            if (neg && b.is_zero()) {
                fail("zero to a negative power");
            }
            b = b.pow(neg ? -e : e);
        }
        return b;
    }
    long integer_literal()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
        if (start == pos_) {
            fail("expected an integer");
        }
        if (pos_ - start > 9) {
            fail("integer literal too long");
        }
        return std::stol(std::string(s_.substr(start, pos_ - start)));
    }
    RationalFunction atom()
    {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end of input");
        }
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            RationalFunction r = expr();
            if (!eat(')')) {
                fail("expected ')'");
            }
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            }
            return RationalFunction::constant(f_, n_, Scalar(f_, rational(std::string(s_.substr(start, pos_ - start)))));
        }
        if (c == 'x') {
            ++pos_;
            const long i = integer_literal();
            if (i < 1 || static_cast<std::size_t>(i) > n_) {
                fail("variable x" + std::to_string(i) + " outside x1..x" + std::to_string(n_));
            }
            return RationalFunction::variable(f_, n_, static_cast<std::size_t>(i - 1));
        }
        if (c == 'z') {
            ++pos_;
            return RationalFunction::constant(f_, n_, Scalar::zeta(f_));
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    FieldDescriptor f_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Grammar: expr = term {("+"|"-") term}; term = unary {("*"|"/") unary};
/// unary = ("-"|"+") unary | atom ["^" ["-"] int]; atom = int | "x"int | "z" | "(" expr ")".
/// "z" is the field generator zeta_n.
inline RationalFunction parse_rational_function(std::string_view s, const FieldDescriptor &f, std::size_t nvars)
{
    return detail::RfParser(s, f, nvars).parse();
}

} // namespace semilin

#endif
