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

#ifndef SEMILIN_SERIES_HPP
#define SEMILIN_SERIES_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <semilin/error.hpp>
#include <semilin/scalar.hpp>

namespace semilin
{

/// Default number of known coefficients used when a precision is not given.
inline constexpr long default_precision = 64;

/// Precision sentinel for series that are known exactly (Laurent polynomials).
/// Every precision at or above this value is clamped to it.
inline constexpr long exact_precision = 1L << 40;

inline constexpr long clamp_precision(long p) noexcept { return p > exact_precision ? exact_precision : p; }

namespace detail
{

// First n coefficients of the product of two dense coefficient vectors.
// Operands are lifted to integer coordinates over a common denominator, so the
// inner loop is pure mpz multiply-accumulate.
inline std::vector<Scalar> convolve(const FieldDescriptor &f, const std::vector<Scalar> &a,
                                    const std::vector<Scalar> &b, std::size_t n)
{
    n = std::min(n, a.empty() || b.empty() ? std::size_t{0} : a.size() + b.size() - 1);
    std::vector<Scalar> out;
    out.reserve(n);
    if (n == 0) {
        return out;
    }
    const std::size_t d = f.degree();
    auto lift = [d, n](const std::vector<Scalar> &v, integer &den) {
        den = 1;
        const std::size_t len = std::min(v.size(), n);
        for (std::size_t i = 0; i < len; ++i) {
            for (const auto &c : v[i].coeffs()) {
                mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
            }
        }
        std::vector<integer> z(len * d);
        for (std::size_t i = 0; i < len; ++i) {
            for (std::size_t c = 0; c < d; ++c) {
                const rational &x = v[i].coeffs()[c];
                if (sgn(x) != 0) {
                    z[i * d + c] = x.get_num() * (den / x.get_den());
                }
            }
        }
        return z;
    };
    integer da, db;
    const auto za = lift(a, da);
    const auto zb = lift(b, db);
    const std::size_t la = za.size() / d, lb = zb.size() / d;
    const std::size_t w = 2 * d - 1;
    std::vector<integer> acc(n * w);
    for (std::size_t i = 0; i < la; ++i) {
        for (std::size_t ca = 0; ca < d; ++ca) {
            const integer &x = za[i * d + ca];
            if (sgn(x) == 0) {
                continue;
            }
            const std::size_t jmax = std::min(lb, n - i);
            for (std::size_t j = 0; j < jmax; ++j) {
                for (std::size_t cb = 0; cb < d; ++cb) {
                    const integer &y = zb[j * d + cb];
                    if (sgn(y) != 0) {
                        mpz_addmul(acc[(i + j) * w + ca + cb].get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
                    }
                }
            }
        }
    }
    const integer den = da * db;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<rational> poly(w);
        for (std::size_t c = 0; c < w; ++c) {
            poly[c] = rational(acc[k * w + c], den);
        }
        out.emplace_back(f, std::move(poly));
    }
    return out;
}

} // namespace detail

/// A truncated Laurent series over an exact field: the series is known modulo
/// t^prec, and the stored coefficients cover exponents valuation .. prec-1 with
/// a nonzero leading coefficient. A series with no nonzero known coefficient is
/// the explicit "zero within precision" value and has no valuation.
class LaurentSeries
{
public:
    LaurentSeries() : val_(default_precision), prec_(default_precision) {}

    static LaurentSeries zero(const FieldDescriptor &f, long prec)
    {
        LaurentSeries s;
        s.field_ = f;
        s.val_ = s.prec_ = clamp_precision(prec);
        return s;
    }

    /// Builds a series from coefficients of t^start, t^(start+1), ...; anything
    /// at or beyond prec is dropped.
    static LaurentSeries from_coeffs(const FieldDescriptor &f, long start, std::vector<Scalar> coeffs, long prec)
    {
        LaurentSeries s;
        s.field_ = f;
        s.prec_ = clamp_precision(prec);
        s.val_ = start;
        s.coeffs_ = std::move(coeffs);
        for (const auto &c : s.coeffs_) {
            if (c.field() != f) {
                throw FieldMismatch("series coefficient field differs from " + f.name());
            }
        }
        s.normalize();
        return s;
    }

    static LaurentSeries monomial(const Scalar &c, long exponent, long prec)
    {
        return from_coeffs(c.field(), exponent, {c}, prec);
    }
    static LaurentSeries constant(const Scalar &c, long prec) { return monomial(c, 0, prec); }
    static LaurentSeries one(const FieldDescriptor &f, long prec) { return constant(Scalar(f, 1L), prec); }
    static LaurentSeries exact(const Scalar &c, long exponent = 0) { return monomial(c, exponent, exact_precision); }

    /// True for Laurent polynomials known exactly.
    bool is_exact() const noexcept { return prec_ >= exact_precision; }

    const FieldDescriptor &field() const noexcept { return field_; }
    long prec() const noexcept { return prec_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    /// Stored coefficients, starting at the valuation.
    const std::vector<Scalar> &coeffs() const noexcept { return coeffs_; }

    long valuation() const
    {
        if (is_zero()) {
            throw IndistinguishableFromZero("valuation of a series that is zero modulo t^" + std::to_string(prec_));
        }
        return val_;
    }

    /// Lower bound for the valuation; equals prec for the zero series.
    long min_exponent() const noexcept { return val_; }

    /// Relative precision prec - valuation (0 for the zero series).
    long rel_prec() const noexcept { return prec_ - val_; }

    /// Coefficient of t^e; e must lie below the precision.
    Scalar coeff(long e) const
    {
        if (e >= prec_) {
            throw std::out_of_range("coefficient of t^" + std::to_string(e) + " is beyond precision "
                                    + std::to_string(prec_));
        }
        if (e < val_ || e - val_ >= static_cast<long>(coeffs_.size())) {
            return Scalar(field_);
        }
        return coeffs_[static_cast<std::size_t>(e - val_)];
    }

    LaurentSeries operator-() const
    {
        LaurentSeries r(*this);
        for (auto &c : r.coeffs_) {
            c = -c;
        }
        return r;
    }

    friend LaurentSeries operator+(const LaurentSeries &a, const LaurentSeries &b) { return add(a, b, false); }
    friend LaurentSeries operator-(const LaurentSeries &a, const LaurentSeries &b) { return add(a, b, true); }

    /// Product; precision min(prec_a + val_b, prec_b + val_a).
    friend LaurentSeries operator*(const LaurentSeries &a, const LaurentSeries &b)
    {
        a.check_field(b);
        const long pa = a.is_exact() ? exact_precision : a.prec_ + b.val_;
        const long pb = b.is_exact() ? exact_precision : b.prec_ + a.val_;
        const long prec = clamp_precision(std::min(pa, pb));
        const long start = a.val_ + b.val_;
        if (a.is_zero() || b.is_zero() || prec <= start) {
            return zero(a.field_, prec);
        }
        auto c = detail::convolve(a.field_, a.coeffs_, b.coeffs_, static_cast<std::size_t>(prec - start));
        return from_coeffs(a.field_, start, std::move(c), prec);
    }

    LaurentSeries &operator+=(const LaurentSeries &o) { return *this = *this + o; }
    LaurentSeries &operator-=(const LaurentSeries &o) { return *this = *this - o; }
    LaurentSeries &operator*=(const LaurentSeries &o) { return *this = *this * o; }

    LaurentSeries scaled(const Scalar &c) const
    {
        if (c.is_zero()) {
            return zero(field_, prec_);
        }
        LaurentSeries r(*this);
        for (auto &x : r.coeffs_) {
            x *= c;
        }
        return r;
    }

    /// Multiplication by t^k; exact, shifts the precision as well.
    LaurentSeries shifted(long k) const
    {
        LaurentSeries r(*this);
        if (!is_exact()) {
            r.prec_ += k;
        }
        r.val_ = r.is_zero() ? r.prec_ : r.val_ + k;
        return r;
    }

    /// Multiplicative inverse; absolute precision prec - 2 * valuation. The
    /// inverse of an exact series other than a monomial is an infinite
    /// expansion and is computed to relative precision exact_rel_prec.
    LaurentSeries inverse(long exact_rel_prec = default_precision) const
    {
        if (is_zero()) {
            throw IndistinguishableFromZero("cannot invert a series that is zero modulo t^" + std::to_string(prec_));
        }
        if (is_exact() && coeffs_.size() == 1) {
            return exact(coeffs_[0].inverse(), -val_);
        }
        const auto r = static_cast<std::size_t>(is_exact() ? exact_rel_prec : rel_prec());
        // Newton iteration b <- b + b (1 - a b) on the unit part.
        std::vector<Scalar> b{coeffs_[0].inverse()};
        std::size_t known = 1;
        while (known < r) {
            const std::size_t next = std::min(2 * known, r);
            auto ab = detail::convolve(field_, coeffs_, b, next);
            ab.resize(next, Scalar(field_));
            std::vector<Scalar> e(next, Scalar(field_));
            for (std::size_t i = known; i < next; ++i) {
                e[i] = -ab[i];
            }
            auto corr = detail::convolve(field_, b, e, next);
            b.resize(next, Scalar(field_));
            for (std::size_t i = known; i < corr.size(); ++i) {
                b[i] += corr[i];
            }
            known = next;
        }
        const long rel = static_cast<long>(r);
        return from_coeffs(field_, -val_, std::move(b), -val_ + rel);
    }

    /// a(t^p): valuation p * v, precision p * prec.
    LaurentSeries substitute_power(long p) const
    {
        if (p < 1) {
            throw std::invalid_argument("substitute_power: exponent must be positive");
        }
        LaurentSeries r;
        r.field_ = field_;
        r.prec_ = clamp_precision(p * prec_);
        r.val_ = is_zero() ? r.prec_ : p * val_;
        if (!is_zero()) {
            r.coeffs_.assign((coeffs_.size() - 1) * static_cast<std::size_t>(p) + 1, Scalar(field_));
            for (std::size_t i = 0; i < coeffs_.size(); ++i) {
                r.coeffs_[i * static_cast<std::size_t>(p)] = coeffs_[i];
            }
        }
        return r;
    }

    /// Forgets every coefficient at or beyond new_prec (no-op if new_prec >= prec).
    LaurentSeries truncated(long new_prec) const
    {
        if (new_prec >= prec_) {
            return *this;
        }
        std::vector<Scalar> c;
        if (new_prec > val_) {
            const auto keep = std::min(coeffs_.size(), static_cast<std::size_t>(new_prec - val_));
            c.assign(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(keep));
        }
        return from_coeffs(field_, std::min(val_, new_prec), std::move(c), new_prec);
    }

    /// True when a - b vanishes modulo t^min(prec_a, prec_b).
    bool equals_within_precision(const LaurentSeries &o) const { return (*this - o).is_zero(); }

    /// Lowest exponent below the common precision where the two series differ.
    std::optional<long> first_difference(const LaurentSeries &o) const
    {
        const auto d = *this - o;
        if (d.is_zero()) {
            return std::nullopt;
        }
        return d.val_;
    }

    /// True when every known coefficient other than t^0 vanishes and t^0 is known.
    bool is_constant() const noexcept { return prec_ > 0 && (is_zero() || (val_ == 0 && coeffs_.size() == 1)); }

    /// Coefficient of t^0; requires prec > 0.
    Scalar constant_term() const { return coeff(0); }

    /// Pretty form such as "t^-1 + 2 + 3*t^2 + O(t^5)". Not parsed back.
    std::string to_string() const
    {
        std::ostringstream os;
        bool first = true;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            const Scalar &c = coeffs_[i];
            if (c.is_zero()) {
                continue;
            }
            const long e = val_ + static_cast<long>(i);
            std::string cs = c.to_string();
            const bool compound = !c.is_rational();
            bool negative = !compound && sgn(c.rational_part()) < 0;
            if (negative) {
                cs = (-c).to_string();
            }
            if (compound) {
                cs = "(" + cs + ")";
            }
            if (!first) {
                os << (negative ? " - " : " + ");
            } else if (negative) {
                os << "-";
            }
            first = false;
            if (e == 0) {
                os << cs;
            } else {
                if (cs != "1") {
                    os << cs << "*";
                }
                os << "t";
                if (e != 1) {
                    os << "^" << e;
                }
            }
        }
        if (is_exact()) {
            return first ? std::string("0") : os.str();
        }
        if (!first) {
            os << " + ";
        }
        os << "O(t^" << prec_ << ")";
        return os.str();
    }

    friend std::ostream &operator<<(std::ostream &os, const LaurentSeries &s) { return os << s.to_string(); }

    /// Structural equality: same field, precision and known coefficients.
    friend bool operator==(const LaurentSeries &a, const LaurentSeries &b)
    {
        return a.field_ == b.field_ && a.prec_ == b.prec_ && a.val_ == b.val_ && a.coeffs_ == b.coeffs_;
    }
    friend bool operator!=(const LaurentSeries &a, const LaurentSeries &b) { return !(a == b); }

private:
    static LaurentSeries add(const LaurentSeries &a, const LaurentSeries &b, bool subtract)
    {
        a.check_field(b);
        const long prec = std::min(a.prec_, b.prec_);
        if (a.is_zero() && b.is_zero()) {
            return zero(a.field_, prec);
        }
        // a zero operand contributes no extent; its val_ is only a bound
        const long start = a.is_zero() ? b.val_ : b.is_zero() ? a.val_ : std::min(a.val_, b.val_);
        const long end_a = a.is_zero() ? start : a.val_ + static_cast<long>(a.coeffs_.size());
        const long end_b = b.is_zero() ? start : b.val_ + static_cast<long>(b.coeffs_.size());
        const long end = std::min(prec, std::max(end_a, end_b));
        if (end <= start) {
            return zero(a.field_, prec);
        }
        std::vector<Scalar> c(static_cast<std::size_t>(end - start), Scalar(a.field_));
        for (long e = a.val_; e < end && e - a.val_ < static_cast<long>(a.coeffs_.size()); ++e) {
            c[static_cast<std::size_t>(e - start)] = a.coeffs_[static_cast<std::size_t>(e - a.val_)];
        }
        for (long e = b.val_; e < end && e - b.val_ < static_cast<long>(b.coeffs_.size()); ++e) {
            auto &slot = c[static_cast<std::size_t>(e - start)];
            const auto &x = b.coeffs_[static_cast<std::size_t>(e - b.val_)];
            if (subtract) {
                slot -= x;
            } else {
                slot += x;
            }
        }
        return from_coeffs(a.field_, start, std::move(c), prec);
    }

    void check_field(const LaurentSeries &o) const
    {
        if (field_ != o.field_) {
            throw FieldMismatch("series fields differ: " + field_.name() + " vs " + o.field_.name());
        }
    }

    void normalize()
    {
        if (static_cast<long>(coeffs_.size()) > prec_ - val_) {
            coeffs_.resize(static_cast<std::size_t>(std::max(0L, prec_ - val_)), Scalar(field_));
        }
        std::size_t lead = 0;
        while (lead < coeffs_.size() && coeffs_[lead].is_zero()) {
            ++lead;
        }
        if (lead == coeffs_.size()) {
            coeffs_.clear();
            val_ = prec_;
            return;
        }
        coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
        val_ += static_cast<long>(lead);
        // Known zeros between the last nonzero coefficient and prec are implicit.
        while (!coeffs_.empty() && coeffs_.back().is_zero()) {
            coeffs_.pop_back();
        }
    }

    FieldDescriptor field_;
    long val_;
    long prec_;
    std::vector<Scalar> coeffs_;
};

} // namespace semilin

#endif
