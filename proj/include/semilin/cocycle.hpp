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

#ifndef SEMILIN_COCYCLE_HPP
#define SEMILIN_COCYCLE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <semilin/error.hpp>
#include <semilin/matrix.hpp>

namespace semilin
{

/// Multiplicative subsemigroup of the positive integers, given by generators.
class Semigroup
{
public:
    Semigroup() = default;
    explicit Semigroup(std::vector<long> generators) : gens_(std::move(generators)), memo_(std::make_shared<Memo>())
    {
        std::sort(gens_.begin(), gens_.end());
        if (gens_.empty()) {
            throw PreconditionViolated("semigroup needs at least one generator");
        }
        if (std::adjacent_find(gens_.begin(), gens_.end()) != gens_.end()) {
            throw PreconditionViolated("semigroup generators must be distinct");
        }
        if (gens_.front() < 2) {
            throw PreconditionViolated("semigroup generators must be at least 2");
        }
    }

    const std::vector<long> &generators() const noexcept { return gens_; }

    /// gcd of p - 1 over the generators.
    long d() const
    {
        long g = 0;
        for (long p : gens_) {
            g = std::gcd(g, p - 1);
        }
        return g;
    }

    /// Some ordered list of generators whose product is n, if n lies in S.
    std::optional<std::vector<long>> factorization(long n) const
    {
        if (n < 2) {
            return std::nullopt;
        }
        std::lock_guard<std::mutex> lock(memo_->mutex);
        return factor_locked(n);
    }

    bool contains(long n) const { return factorization(n).has_value(); }

    friend bool operator==(const Semigroup &a, const Semigroup &b) { return a.gens_ == b.gens_; }

private:
    struct Memo
    {
        std::mutex mutex;
        std::map<long, std::optional<std::vector<long>>> table;
    };

    std::optional<std::vector<long>> factor_locked(long n) const
    {
        if (auto it = memo_->table.find(n); it != memo_->table.end()) {
            return it->second;
        }
        std::optional<std::vector<long>> result;
        for (long p : gens_) {
            if (p > n || n % p != 0) {
                continue;
            }
            if (p == n) {
                result = std::vector<long>{p};
                break;
            }
            if (auto rest = factor_locked(n / p)) {
                rest->insert(rest->begin(), p);
                result = std::move(rest);
                break;
            }
        }
        memo_->table[n] = result;
        return result;
    }

    std::vector<long> gens_;
    std::shared_ptr<Memo> memo_;
};

/// Family f_p of invertible matrices over k((t)), one per generator, with the
/// convention f_{pq}(t) = f_p(t) f_q(t^p).
struct SemigroupCocycle
{
    Semigroup semigroup;
    std::size_t dim = 0;
    std::map<long, SeriesMatrix> values;

    FieldDescriptor field() const { return field_of(values.begin()->second); }

    const SeriesMatrix &at(long p) const
    {
        auto it = values.find(p);
        if (it == values.end()) {
            throw PreconditionViolated("no value stored for generator " + std::to_string(p));
        }
        return it->second;
    }

    /// Value at an arbitrary element of the semigroup by the extension rule.
    SeriesMatrix value_at(long n) const
    {
        const auto fac = semigroup.factorization(n);
        if (!fac) {
            throw PreconditionViolated(std::to_string(n) + " is not in the semigroup");
        }
        SeriesMatrix acc = at(fac->back());
        for (std::size_t i = fac->size() - 1; i-- > 0;) {
            const long p = (*fac)[i];
            acc = at(p) * substitute_power(acc, p);
        }
        return acc;
    }

    long precision() const
    {
        long p = exact_precision;
        for (const auto &[g, m] : values) {
            p = std::min(p, min_prec(m));
        }
        return p;
    }
};

/// Commuting invertible constant matrices, one per generator.
struct ConstantRepresentation
{
    Semigroup semigroup;
    std::size_t dim = 0;
    std::map<long, ConstantMatrix> values;

    void validate() const
    {
        for (const auto &[p, m] : values) {
            if (m.rows() != dim || m.cols() != dim) {
                throw DimMismatch("constant value at " + std::to_string(p) + " has shape " + m.shape());
            }
            if (determinant(m).is_zero()) {
                throw SingularWithinPrecision("constant value at " + std::to_string(p) + " is singular");
            }
            for (const auto &[q, n] : values) {
                if (p < q && m * n != n * m) {
                    throw PreconditionViolated("constant values at " + std::to_string(p) + " and "
                                               + std::to_string(q) + " do not commute");
                }
            }
        }
    }
};

/// A gauge g(t). The exact inverse is kept when it is known by construction.
struct GaugeTransform
{
    SeriesMatrix g;
    std::optional<SeriesMatrix> known_inverse;

    /// g^-1 with roughly target_prec correct coefficients. An exact target
    /// falls back to the default precision.
    SeriesMatrix inverse(long target_prec = default_precision) const
    {
        if (known_inverse) {
            return *known_inverse;
        }
        if (target_prec >= exact_precision) {
            target_prec = default_precision;
        }
        const long spread = std::max(0L, -min_valuation(g));
        return mat_invert(g, std::max(default_precision, target_prec + 2 * spread + 8));
    }
};

inline GaugeTransform identity_gauge(const FieldDescriptor &f, std::size_t n)
{
    return {series_identity(f, n), series_identity(f, n)};
}

/// The gauge of twisting first by a and then by b.
inline GaugeTransform compose(const GaugeTransform &a, const GaugeTransform &b)
{
    GaugeTransform r{a.g * b.g, std::nullopt};
    if (a.known_inverse && b.known_inverse) {
        r.known_inverse = *b.known_inverse * *a.known_inverse;
    }
    return r;
}

struct TrivializationCertificate
{
    GaugeTransform gauge;
    ConstantRepresentation constant;
    long checked_precision = 0;
};

struct PairReport
{
    long p = 0, q = 0;
    /// Lowest exponent where f_p(t) f_q(t^p) and f_q(t) f_p(t^q) differ.
    std::optional<long> first_violation;
    /// Precision at which the two sides were compared.
    long precision = 0;
};

struct CocycleReport
{
    bool ok = true;
    std::vector<PairReport> pairs;
};

inline CocycleReport verify_cocycle(const SemigroupCocycle &c)
{
    CocycleReport rep;
    const auto &gens = c.semigroup.generators();
    for (long p : gens) {
        c.at(p);
    }
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            const long p = gens[i], q = gens[j];
            const auto lhs = c.at(p) * substitute_power(c.at(q), p);
            const auto rhs = c.at(q) * substitute_power(c.at(p), q);
            PairReport pr{p, q, first_difference(lhs, rhs), std::min(min_prec(lhs), min_prec(rhs))};
            rep.ok = rep.ok && !pr.first_violation;
            rep.pairs.push_back(pr);
        }
    }
    return rep;
}

/// f'_p(t) = g(t)^-1 f_p(t) g(t^p).
inline SemigroupCocycle twist(const SemigroupCocycle &c, const GaugeTransform &g)
{
    if (g.g.rows() != c.dim || !g.g.is_square()) {
        throw DimMismatch("gauge shape " + g.g.shape() + " does not match cocycle dimension "
                          + std::to_string(c.dim));
    }
    const SeriesMatrix gi = g.inverse(c.precision());
    SemigroupCocycle r{c.semigroup, c.dim, {}};
    for (const auto &[p, f] : c.values) {
        r.values.emplace(p, gi * f * substitute_power(g.g, p));
    }
    return r;
}

/// Constant cocycle f_p = M_p, known to the given precision.
inline SemigroupCocycle induce_constant(const ConstantRepresentation &r, long prec = exact_precision)
{
    r.validate();
    SemigroupCocycle c{r.semigroup, r.dim, {}};
    for (const auto &[p, m] : r.values) {
        c.values.emplace(p, truncated(lift(m), prec));
    }
    return c;
}

struct CertificateReport
{
    bool ok = true;
    /// Per generator: lowest exponent below checkedPrecision where the gauged
    /// value differs from the constant, if any.
    std::map<long, std::optional<long>> first_mismatch;
    /// Per generator: precision of the recomputed gauged value.
    std::map<long, long> precision;
    std::string message;
};

inline CertificateReport verify_certificate(const SemigroupCocycle &c, const TrivializationCertificate &cert)
{
    CertificateReport rep;
    if (cert.checked_precision <= 0) {
        rep.ok = false;
        rep.message = "checkedPrecision must be positive";
        return rep;
    }
    if (cert.gauge.g.rows() != c.dim || cert.constant.dim != c.dim) {
        rep.ok = false;
        rep.message = "dimension mismatch";
        return rep;
    }
    SeriesMatrix gi;
    try {
        gi = cert.gauge.inverse(cert.checked_precision);
    } catch (const error &e) {
        rep.ok = false;
        rep.message = std::string("gauge is not invertible: ") + e.what();
        return rep;
    }
    for (long p : c.semigroup.generators()) {
        auto it = cert.constant.values.find(p);
        if (it == cert.constant.values.end()) {
            rep.ok = false;
            rep.message = "certificate has no constant for generator " + std::to_string(p);
            continue;
        }
        const auto gauged = gi * c.at(p) * substitute_power(cert.gauge.g, p);
        const long prec = min_prec(gauged);
        rep.precision[p] = prec;
        const auto diff = first_difference(truncated(gauged, cert.checked_precision), lift(it->second));
        rep.first_mismatch[p] = diff;
        if (diff) {
            rep.ok = false;
            rep.message = "mismatch at generator " + std::to_string(p) + ", exponent " + std::to_string(*diff);
        } else if (prec < cert.checked_precision) {
            rep.ok = false;
            rep.message = "generator " + std::to_string(p) + " is only known to precision " + std::to_string(prec);
        }
    }
    return rep;
}

namespace detail
{

// Uniform integer in [lo, hi] from raw engine output; reproducible across
// standard library implementations.
inline long uniform(std::mt19937_64 &rng, long lo, long hi)
{
    return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline long nonzero_uniform(std::mt19937_64 &rng, long range)
{
    const long x = uniform(rng, 1, range);
    return (rng() & 1U) ? x : -x;
}

} // namespace detail

/// Product of `complexity` elementary matrices I + c t^e E_ij (e in [0, 2])
/// followed by a diagonal t-power matrix. complexity 0 gives the identity.
/// The inverse is exact and is stored alongside.
inline GaugeTransform random_gauge(std::size_t dim, const FieldDescriptor &f, std::uint64_t seed, int complexity)
{
    std::mt19937_64 rng(seed);
    GaugeTransform g = identity_gauge(f, dim);
    if (complexity <= 0) {
        return g;
    }
    SeriesMatrix inv = series_identity(f, dim);
    for (int k = 0; k < complexity && dim > 1; ++k) {
        const auto i = static_cast<std::size_t>(detail::uniform(rng, 0, static_cast<long>(dim) - 1));
        auto j = static_cast<std::size_t>(detail::uniform(rng, 0, static_cast<long>(dim) - 2));
        if (j >= i) {
            ++j;
        }
        const Scalar c(f, detail::nonzero_uniform(rng, 3));
        const long e = detail::uniform(rng, 0, 2);
        SeriesMatrix el = series_identity(f, dim), el_inv = series_identity(f, dim);
        el(i, j) = LaurentSeries::exact(c, e);
        el_inv(i, j) = LaurentSeries::exact(-c, e);
        g.g = g.g * el;
        inv = el_inv * inv;
    }
    SeriesMatrix diag = series_identity(f, dim), diag_inv = series_identity(f, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const long a = detail::uniform(rng, -1, 1);
        diag(i, i) = LaurentSeries::exact(Scalar(f, 1L), a);
        diag_inv(i, i) = LaurentSeries::exact(Scalar(f, 1L), -a);
    }
    g.g = g.g * diag;
    g.known_inverse = diag_inv * inv;
    return g;
}

/// Random commuting constants M_p = P (a_p + b_p X + c_p X^2) P^-1 with X upper
/// triangular with integer eigenvalues and P unimodular.
inline ConstantRepresentation random_constant_representation(const Semigroup &s, std::size_t dim,
                                                             const FieldDescriptor &f, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    ConstantMatrix x = constant_zero(f, dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        x(i, i) = Scalar(f, detail::uniform(rng, -3, 3));
        for (std::size_t j = i + 1; j < dim; ++j) {
            x(i, j) = Scalar(f, detail::uniform(rng, -2, 2));
        }
    }
    ConstantMatrix p = constant_identity(f, dim);
    for (std::size_t k = 0; k < 2 * dim && dim > 1; ++k) {
        const auto i = static_cast<std::size_t>(detail::uniform(rng, 0, static_cast<long>(dim) - 1));
        auto j = static_cast<std::size_t>(detail::uniform(rng, 0, static_cast<long>(dim) - 2));
        if (j >= i) {
            ++j;
        }
        ConstantMatrix el = constant_identity(f, dim);
        el(i, j) = Scalar(f, detail::nonzero_uniform(rng, 2));
        p = p * el;
    }
    const ConstantMatrix pinv = invert(p);
    const ConstantMatrix x2 = x * x;
    ConstantRepresentation r{s, dim, {}};
    for (long g : s.generators()) {
        ConstantMatrix m;
        do {
            const Scalar a(f, detail::nonzero_uniform(rng, 4));
            const Scalar b(f, detail::uniform(rng, -2, 2));
            const Scalar c(f, detail::uniform(rng, -1, 1));
            m = x.map([&b](const Scalar &v) { return b * v; }) + x2.map([&c](const Scalar &v) { return c * v; });
            for (std::size_t i = 0; i < dim; ++i) {
                m(i, i) += a;
            }
        } while (determinant(m).is_zero());
        r.values.emplace(g, p * m * pinv);
    }
    return r;
}

} // namespace semilin

#endif
