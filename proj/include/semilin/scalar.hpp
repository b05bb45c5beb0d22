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

#ifndef SEMILIN_SCALAR_HPP
#define SEMILIN_SCALAR_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include <semilin/error.hpp>

namespace semilin
{

using integer = mpz_class;
using rational = mpq_class;

namespace detail
{

// Dense univariate polynomials over Q, coefficients from degree 0 upwards.
using qpoly = std::vector<rational>;

inline void trim(qpoly &p)
{
    while (!p.empty() && sgn(p.back()) == 0) {
        p.pop_back();
    }
}

inline qpoly qpoly_mul(const qpoly &a, const qpoly &b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    qpoly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i]) == 0) {
            continue;
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            r[i + j] += a[i] * b[j];
        }
    }
    trim(r);
    return r;
}

inline qpoly qpoly_sub(qpoly a, const qpoly &b)
{
    if (a.size() < b.size()) {
        a.resize(b.size());
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        a[i] -= b[i];
    }
    trim(a);
    return a;
}

// Euclidean division; b must be nonzero.
inline std::pair<qpoly, qpoly> qpoly_divmod(qpoly a, const qpoly &b)
{
    trim(a);
    qpoly q;
    if (a.size() < b.size()) {
        return {q, a};
    }
    q.assign(a.size() - b.size() + 1, rational(0));
    const rational &lead = b.back();
    for (std::size_t i = a.size(); i-- >= b.size();) {
        if (sgn(a[i]) == 0) {
            continue;
        }
        rational c = a[i] / lead;
        q[i - b.size() + 1] = c;
        for (std::size_t j = 0; j < b.size(); ++j) {
            a[i - b.size() + 1 + j] -= c * b[j];
        }
    }
    trim(a);
    trim(q);
    return {q, a};
}

// Phi_n by dividing x^n - 1 by Phi_d for every proper divisor d of n.
inline qpoly compute_cyclotomic(unsigned n, const std::map<unsigned, std::shared_ptr<const qpoly>> &known);

inline std::shared_ptr<const qpoly> cyclotomic_polynomial(unsigned n)
{
    static std::mutex mtx;
    static std::map<unsigned, std::shared_ptr<const qpoly>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    for (unsigned d = 1; d <= n; ++d) {
        if (n % d == 0 && cache.find(d) == cache.end()) {
            cache.emplace(d, std::make_shared<const qpoly>(compute_cyclotomic(d, cache)));
        }
    }
    return cache.at(n);
}

inline qpoly compute_cyclotomic(unsigned n, const std::map<unsigned, std::shared_ptr<const qpoly>> &known)
{
    qpoly p(n + 1, rational(0));
    p[0] = -1;
    p[n] = 1;
    for (unsigned d = 1; d < n; ++d) {
        if (n % d == 0) {
            p = qpoly_divmod(p, *known.at(d)).first;
        }
    }
    return p;
}

} // namespace detail

/// The exact coefficient field: either Q or a cyclotomic field Q(zeta_n).
class FieldDescriptor
{
public:
    enum class kind_t { rationals, cyclotomic };

    FieldDescriptor() : FieldDescriptor(kind_t::rationals, 1) {}

    static FieldDescriptor rationals() { return FieldDescriptor(); }

    /// Q(zeta_n). Conductor 1 is normalized to the rationals.
    static FieldDescriptor cyclotomic(unsigned n)
    {
        if (n == 0) {
            throw std::invalid_argument("cyclotomic conductor must be positive");
        }
        if (n == 1) {
            return rationals();
        }
        return FieldDescriptor(kind_t::cyclotomic, n);
    }

    /// Parses the CLI spelling: "q" or "cyclo:N".
    static FieldDescriptor parse(std::string_view s)
    {
        if (s == "q" || s == "Q" || s == "rationals") {
            return rationals();
        }
        constexpr std::string_view prefix = "cyclo:";
        if (s.substr(0, prefix.size()) == prefix) {
            const std::string digits(s.substr(prefix.size()));
            if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })
                && digits.size() < 7) {
                const auto n = static_cast<unsigned>(std::stoul(digits));
                if (n > 0) {
                    return cyclotomic(n);
                }
            }
        }
        throw ParseError("invalid field '" + std::string(s) + "', expected q or cyclo:N");
    }

    kind_t kind() const noexcept { return kind_; }
    unsigned conductor() const noexcept { return conductor_; }
    /// Degree over Q, i.e. Euler's phi of the conductor.
    std::size_t degree() const noexcept { return modulus_->size() - 1; }
    /// The monic defining polynomial Phi_n, low degree first.
    const std::vector<rational> &modulus() const noexcept { return *modulus_; }
    /// Order of the full group of roots of unity contained in the field.
    unsigned roots_of_unity_order() const noexcept { return conductor_ % 2 == 0 ? conductor_ : 2 * conductor_; }

    std::string name() const
    {
        return kind_ == kind_t::rationals ? std::string("q") : "cyclo:" + std::to_string(conductor_);
    }

    friend bool operator==(const FieldDescriptor &a, const FieldDescriptor &b) noexcept
    {
        return a.kind_ == b.kind_ && a.conductor_ == b.conductor_;
    }
    friend bool operator!=(const FieldDescriptor &a, const FieldDescriptor &b) noexcept { return !(a == b); }

private:
    FieldDescriptor(kind_t k, unsigned n) : kind_(k), conductor_(n), modulus_(detail::cyclotomic_polynomial(n)) {}

    kind_t kind_;
    unsigned conductor_;
    std::shared_ptr<const std::vector<rational>> modulus_;
};

/// An element of a FieldDescriptor, stored as a polynomial in zeta_n of
/// degree below phi(n). The representation is canonical.
class Scalar
{
public:
    Scalar() : coeffs_(1) {}
    explicit Scalar(const FieldDescriptor &f) : field_(f), coeffs_(f.degree()) {}
    Scalar(const FieldDescriptor &f, const rational &r) : field_(f), coeffs_(f.degree())
    {
        coeffs_[0] = r;
        coeffs_[0].canonicalize();
    }
    Scalar(const FieldDescriptor &f, long v) : Scalar(f, rational(v)) {}
    /// Arbitrary-length polynomial in zeta_n; reduced on construction.
    Scalar(const FieldDescriptor &f, std::vector<rational> poly) : field_(f), coeffs_(std::move(poly))
    {
        for (auto &c : coeffs_) {
            c.canonicalize();
        }
        reduce();
    }

    /// The generator zeta_n of the field (-1 for conductor 2, 1 for Q).
    static Scalar zeta(const FieldDescriptor &f)
    {
        std::vector<rational> x(2);
        x[1] = 1;
        return Scalar(f, std::move(x));
    }

    const FieldDescriptor &field() const noexcept { return field_; }
    const std::vector<rational> &coeffs() const noexcept { return coeffs_; }

    bool is_zero() const noexcept
    {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](const rational &c) { return sgn(c) == 0; });
    }
    bool is_rational() const noexcept
    {
        return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](const rational &c) { return sgn(c) == 0; });
    }
    bool is_one() const noexcept { return is_rational() && coeffs_[0] == 1; }
    const rational &rational_part() const noexcept { return coeffs_[0]; }

    Scalar operator-() const
    {
        Scalar r(*this);
        for (auto &c : r.coeffs_) {
            c = -c;
        }
        return r;
    }

    Scalar &operator+=(const Scalar &o)
    {
        check_field(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            coeffs_[i] += o.coeffs_[i];
        }
        return *this;
    }
    Scalar &operator-=(const Scalar &o)
    {
        check_field(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            coeffs_[i] -= o.coeffs_[i];
        }
        return *this;
    }
    Scalar &operator*=(const Scalar &o)
    {
        check_field(o);
        if (coeffs_.size() == 1) {
            coeffs_[0] *= o.coeffs_[0];
            return *this;
        }
        std::vector<rational> prod(2 * coeffs_.size() - 1);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (sgn(coeffs_[i]) == 0) {
                continue;
            }
            for (std::size_t j = 0; j < o.coeffs_.size(); ++j) {
                if (sgn(o.coeffs_[j]) != 0) {
                    prod[i + j] += coeffs_[i] * o.coeffs_[j];
                }
            }
        }
        coeffs_ = std::move(prod);
        reduce();
        return *this;
    }
    Scalar &operator/=(const Scalar &o)
    {
        check_field(o);
        return *this *= o.inverse();
    }

    friend Scalar operator+(Scalar a, const Scalar &b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar &b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar &b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar &b) { return a /= b; }

    /// Multiplicative inverse via the extended Euclidean algorithm modulo Phi_n.
    Scalar inverse() const
    {
        if (is_zero()) {
            throw DivisionByZero("division by zero in " + field_.name());
        }
        if (coeffs_.size() == 1) {
            return Scalar(field_, rational(1 / coeffs_[0]));
        }
        // Invariant: s * a == r0 (mod Phi), s1 * a == r1 (mod Phi).
        detail::qpoly r0 = field_.modulus(), r1 = coeffs_;
        detail::trim(r1);
        detail::qpoly s0, s1{rational(1)};
        while (r1.size() > 1) {
            auto [q, r] = detail::qpoly_divmod(r0, r1);
            auto s = detail::qpoly_sub(s0, detail::qpoly_mul(q, s1));
            r0 = std::move(r1);
            r1 = std::move(r);
            s0 = std::move(s1);
            s1 = std::move(s);
        }
        // r1 is a nonzero constant since Phi_n is irreducible.
        const rational c = r1[0];
        for (auto &x : s1) {
            x /= c;
        }
        return Scalar(field_, std::move(s1));
    }

    Scalar pow(long e) const
    {
        if (e < 0) {
            return inverse().pow(-e);
        }
        Scalar result(field_, 1L), base(*this);
        while (e > 0) {
            if (e & 1) {
                result *= base;
            }
            e >>= 1;
            if (e > 0) {
                base *= base;
            }
        }
        return result;
    }

    friend bool operator==(const Scalar &a, const Scalar &b)
    {
        return a.field_ == b.field_ && a.coeffs_ == b.coeffs_;
    }
    friend bool operator!=(const Scalar &a, const Scalar &b) { return !(a == b); }

    /// Human-readable form; zeta_n is printed as "z".
    std::string to_string() const
    {
        if (coeffs_.size() == 1) {
            return coeffs_[0].get_str();
        }
        std::ostringstream os;
        bool first = true;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            const rational &c = coeffs_[i];
            if (sgn(c) == 0) {
                continue;
            }
            rational a = abs(c);
            if (first) {
                if (sgn(c) < 0) {
                    os << "-";
                }
            } else {
                os << (sgn(c) < 0 ? " - " : " + ");
            }
            first = false;
            if (i == 0) {
                os << a.get_str();
                continue;
            }
            if (a != 1) {
                os << a.get_str() << "*";
            }
            os << "z";
            if (i > 1) {
                os << "^" << i;
            }
        }
        return first ? std::string("0") : os.str();
    }

    friend std::ostream &operator<<(std::ostream &os, const Scalar &s) { return os << s.to_string(); }

private:
    void check_field(const Scalar &o) const
    {
        if (field_ != o.field_) {
            throw FieldMismatch("scalar fields differ: " + field_.name() + " vs " + o.field_.name());
        }
    }

    void reduce()
    {
        const auto &m = field_.modulus();
        const std::size_t d = m.size() - 1;
        for (std::size_t i = coeffs_.size(); i-- > d;) {
            if (sgn(coeffs_[i]) == 0) {
                continue;
            }
            const rational c = coeffs_[i];
            for (std::size_t j = 0; j <= d; ++j) {
                coeffs_[i - d + j] -= c * m[j];
            }
        }
        coeffs_.resize(d);
    }

    FieldDescriptor field_;
    std::vector<rational> coeffs_;
};

/// Deterministic order used when several roots or eigenvalues are available:
/// rational part ascending, then the remaining cyclotomic coordinates descending.
inline bool root_order_less(const Scalar &a, const Scalar &b)
{
    const auto &x = a.coeffs();
    const auto &y = b.coeffs();
    if (x[0] != y[0]) {
        return x[0] < y[0];
    }
    for (std::size_t i = 1; i < x.size() && i < y.size(); ++i) {
        if (x[i] != y[i]) {
            return x[i] > y[i];
        }
    }
    return false;
}

/// A primitive root of unity of the given order. The field contains exactly the
/// roots of unity of order dividing lcm(2, conductor).
inline Scalar root_of_unity(const FieldDescriptor &f, unsigned order)
{
    const unsigned full = f.roots_of_unity_order();
    if (order == 0 || full % order != 0) {
        throw OrderNotAvailable("no primitive root of unity of order " + std::to_string(order) + " in " + f.name());
    }
    // A generator of the full group: zeta_n if n is even, -zeta_n otherwise.
    Scalar gen = Scalar::zeta(f);
    if (f.conductor() % 2 != 0) {
        gen = -gen;
    }
    return gen.pow(static_cast<long>(full / order));
}

/// Evaluates a polynomial (low degree first) at x.
inline Scalar poly_eval(const std::vector<Scalar> &p, const Scalar &x)
{
    Scalar acc(x.field());
    for (std::size_t i = p.size(); i-- > 0;) {
        acc = acc * x + p[i];
    }
    return acc;
}

namespace detail
{

// Prime factorization by trial division. Refuses numbers whose cofactor
// cannot be certified prime within the trial bound.
inline std::vector<std::pair<integer, unsigned>> factor_integer(integer n)
{
    std::vector<std::pair<integer, unsigned>> out;
    n = abs(n);
    constexpr unsigned long bound = 2000000;
    for (unsigned long d = 2; d <= bound; ++d) {
        if (integer(d) * d > n) {
            break;
        }
        if (mpz_divisible_ui_p(n.get_mpz_t(), d)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(n.get_mpz_t(), d)) {
                n /= d;
                ++e;
            }
            out.emplace_back(integer(d), e);
        }
    }
    if (n > 1) {
        if (n >= integer(bound) * bound) {
            throw std::domain_error("coefficient too large for the rational-root search");
        }
        out.emplace_back(n, 1);
    }
    return out;
}

inline std::vector<integer> positive_divisors(const integer &n)
{
    std::vector<integer> divs{integer(1)};
    for (const auto &[prime, e] : factor_integer(n)) {
        const std::size_t count = divs.size();
        integer pk = 1;
        for (unsigned k = 1; k <= e; ++k) {
            pk *= prime;
            for (std::size_t i = 0; i < count; ++i) {
                divs.push_back(divs[i] * pk);
            }
        }
    }
    return divs;
}

inline rational qpoly_eval(const qpoly &p, const rational &x)
{
    rational acc = 0;
    for (std::size_t i = p.size(); i-- > 0;) {
        acc = acc * x + p[i];
    }
    return acc;
}

// Distinct nonzero rational roots of a nonzero rational polynomial.
inline std::vector<rational> nonzero_rational_roots(qpoly p)
{
    trim(p);
    std::size_t low = 0;
    while (low < p.size() && sgn(p[low]) == 0) {
        ++low;
    }
    p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(low));
    std::vector<rational> roots;
    if (p.size() < 2) {
        return roots;
    }
    integer den_lcm = 1;
    for (const auto &c : p) {
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den_mpz_t());
    }
    std::vector<integer> ip;
    for (const auto &c : p) {
        ip.push_back(c.get_num() * (den_lcm / c.get_den()));
    }
    for (const auto &num : positive_divisors(ip.front())) {
        for (const auto &den : positive_divisors(ip.back())) {
            for (int s : {1, -1}) {
                rational cand(num * s, den);
                cand.canonicalize();
                if (sgn(qpoly_eval(p, cand)) == 0
                    && std::find(roots.begin(), roots.end(), cand) == roots.end()) {
                    roots.push_back(cand);
                }
            }
        }
    }
    return roots;
}

} // namespace detail

/// Roots lying in the field of a nonzero polynomial (low degree first), with
/// multiplicities. Only roots of the form (rational) * (root of unity in the
/// field) are searched; the result is sorted by root_order_less.
inline std::vector<std::pair<Scalar, unsigned>> poly_roots_in_field(std::vector<Scalar> coeffs)
{
    while (!coeffs.empty() && coeffs.back().is_zero()) {
        coeffs.pop_back();
    }
    if (coeffs.empty()) {
        throw std::invalid_argument("poly_roots_in_field: zero polynomial");
    }
    const FieldDescriptor f = coeffs.front().field();
    for (const auto &c : coeffs) {
        if (c.field() != f) {
            throw FieldMismatch("polynomial coefficients from different fields");
        }
    }
    std::vector<Scalar> candidates;
    if (coeffs.size() > 1 && coeffs.front().is_zero()) {
        candidates.emplace_back(f);
    }
    const unsigned order = f.roots_of_unity_order();
    const Scalar omega = root_of_unity(f, order);
    Scalar w(f, 1L);
    for (unsigned j = 0; j < order; ++j, w *= omega) {
        // P(w X) coordinate-wise; a rational root X must annihilate every coordinate.
        std::vector<detail::qpoly> coords(f.degree(), detail::qpoly(coeffs.size()));
        Scalar wk(f, 1L);
        for (std::size_t k = 0; k < coeffs.size(); ++k, wk *= w) {
            const Scalar term = coeffs[k] * wk;
            for (std::size_t i = 0; i < f.degree(); ++i) {
                coords[i][k] = term.coeffs()[i];
            }
        }
        for (auto &q : coords) {
            detail::trim(q);
            if (q.empty()) {
                continue;
            }
            for (const auto &x : detail::nonzero_rational_roots(q)) {
                Scalar r = Scalar(f, x) * w;
                if (poly_eval(coeffs, r).is_zero()
                    && std::find(candidates.begin(), candidates.end(), r) == candidates.end()) {
                    candidates.push_back(r);
                }
            }
            break;
        }
    }
    std::vector<std::pair<Scalar, unsigned>> out;
    for (const auto &r : candidates) {
        // Multiplicity by repeated synthetic division.
        std::vector<Scalar> p = coeffs;
        unsigned mult = 0;
        while (p.size() > 1 && poly_eval(p, r).is_zero()) {
            std::vector<Scalar> q(p.size() - 1, Scalar(f));
            Scalar carry(f);
            for (std::size_t i = p.size(); i-- > 1;) {
                carry = carry * r + p[i];
                q[i - 1] = carry;
            }
            p = std::move(q);
            ++mult;
        }
        out.emplace_back(r, mult);
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return root_order_less(a.first, b.first); });
    return out;
}

} // namespace semilin

#endif
