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

#ifndef SEMILIN_LOCALSOLVE_HPP
#define SEMILIN_LOCALSOLVE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <semilin/cocycle.hpp>
#include <semilin/error.hpp>
#include <semilin/matrix.hpp>

namespace semilin
{

namespace detail
{

inline void require_integral(const SeriesMatrix &f, const char *who)
{
    for (std::size_t i = 0; i < f.rows(); ++i) {
        for (std::size_t j = 0; j < f.cols(); ++j) {
            if (!f(i, j).is_zero() && f(i, j).min_exponent() < 0) {
                throw NotIntegral(std::string(who) + ": entry (" + std::to_string(i) + "," + std::to_string(j)
                                  + ") has valuation " + std::to_string(f(i, j).min_exponent()));
            }
        }
    }
}

// sigma_p on coordinate vectors: x(t) -> f_p(t) x(t^p).
inline SeriesVector sigma(const SeriesMatrix &f, long p, const SeriesVector &x)
{
    SeriesVector xs;
    xs.reserve(x.size());
    for (const auto &e : x) {
        xs.push_back(e.substitute_power(p));
    }
    return mat_vec(f, xs);
}

// n x n identity with g placed at (offset, offset).
inline SeriesMatrix embed(const SeriesMatrix &g, std::size_t n, std::size_t offset)
{
    auto r = series_identity(field_of(g), n);
    r.set_block(offset, offset, g);
    return r;
}

inline long ipow(long b, long e)
{
    long r = 1;
    while (e-- > 0) {
        r *= b;
    }
    return r;
}

inline bool is_constant_cocycle(const SemigroupCocycle &c)
{
    return std::all_of(c.values.begin(), c.values.end(), [](const auto &kv) { return is_constant(kv.second); });
}

inline std::map<long, ConstantMatrix> constant_values(const SemigroupCocycle &c)
{
    std::map<long, ConstantMatrix> r;
    for (const auto &[p, f] : c.values) {
        r.emplace(p, constant_part(f));
    }
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Reduction of an integral matrix with invertible constant term.

/// Phi in 1 + t gl_N k[[t]] with Phi(t) f(t) Phi(t^p)^-1 = f(0) modulo t^M.
inline GaugeTransform integ_limit(const SeriesMatrix &f_in, long p, long M)
{
    if (p < 2) {
        throw PreconditionViolated("integ_limit: generator must be at least 2");
    }
    const SeriesMatrix f = truncated(f_in, M);
    detail::require_integral(f, "integ_limit");
    const ConstantMatrix f0 = constant_part(f);
    if (determinant(f0).is_zero()) {
        throw SingularAtZero("integ_limit: f(0) is not invertible");
    }
    // P_s = f(t) f(t^p) ... f(t^{p^{s-1}}) = f(t) P_{s-1}(t^p)
    SeriesMatrix prod = f;
    long s = 1;
    for (long reach = p; reach < M; reach *= p) {
        prod = truncated(f * substitute_power(prod, p), M);
        ++s;
    }
    const SeriesMatrix phi = truncated(lift(matrix_power(f0, static_cast<std::size_t>(s))) * mat_invert(prod, M), M);
    return {phi, std::nullopt};
}

struct CongruenceStep
{
    /// Iteration index j >= 1.
    long j = 0;
    /// The guaranteed modulus exponent l^j (capped at the working precision).
    long modulus = 0;
    /// Lowest exponent where C_j and C_{j-1} differ, if any.
    std::optional<long> first_difference;
};

/// Result of block_triangularize: g^-1 f g(t^l) = [[E0, F], [0, H]] with E0
/// constant invertible and H nilpotent modulo t.
struct BlockForm
{
    GaugeTransform g;
    std::size_t split_dim = 0;
    ConstantMatrix e0;
    SeriesMatrix f_block;
    SeriesMatrix h_block;
    /// The limit C(t) of the fixed-point iteration (empty when a block is empty).
    SeriesMatrix c;
    std::vector<CongruenceStep> steps;

    SeriesMatrix assembled() const
    {
        const std::size_t n = split_dim + h_block.rows();
        const FieldDescriptor fld = field_of(g.g);
        auto r = series_zero(fld, n, n);
        r.set_block(0, 0, lift(e0));
        r.set_block(0, split_dim, f_block);
        r.set_block(split_dim, split_dim, h_block);
        return r;
    }
};

inline BlockForm block_triangularize(const SeriesMatrix &f_in, long ell, long M)
{
    if (!f_in.is_square()) {
        throw DimMismatch("block_triangularize on a non-square " + f_in.shape() + " matrix");
    }
    const SeriesMatrix f = truncated(f_in, M);
    detail::require_integral(f, "block_triangularize");
    const FieldDescriptor fld = field_of(f);
    const std::size_t n = f.rows();
    const auto sd = stable_decomposition(constant_part(f));
    const std::size_t r = sd.rank_stable;
    const SeriesMatrix a = lift(sd.basis_change);
    const SeriesMatrix fa = lift(invert(sd.basis_change)) * f * a;

    BlockForm bf;
    bf.split_dim = r;
    if (r == 0) {
        bf.g = {a, lift(invert(sd.basis_change))};
        bf.e0 = constant_zero(fld, 0, 0);
        bf.f_block = series_zero(fld, 0, n);
        bf.h_block = fa;
        bf.c = series_zero(fld, n, 0);
        return bf;
    }
    const auto e = fa.block(0, 0, r, r), fb = fa.block(0, r, r, n - r);
    const auto gb = fa.block(r, 0, n - r, r), h = fa.block(r, r, n - r, n - r);

    SeriesMatrix c = truncated(gb * mat_invert(e, M), M);
    long modulus = 1;
    for (long j = 1; modulus < M && r < n; ++j) {
        modulus *= ell;
        const auto cs = substitute_power(c, ell);
        const auto next = truncated((gb + h * cs) * mat_invert(e + fb * cs, M), M);
        const long checked = std::min(modulus, M);
        auto diff = first_difference(next, c);
        bf.steps.push_back({j, checked, diff});
        if (diff && *diff < checked) {
            throw ContractionViolated("block_triangularize: C_" + std::to_string(j) + " and C_" + std::to_string(j - 1)
                                      + " differ at t^" + std::to_string(*diff) + ", below t^"
                                      + std::to_string(checked));
        }
        c = next;
    }
    const auto cs = substitute_power(c, ell);
    const auto e1 = e + fb * cs;
    const auto h1 = h - c * fb;
    const GaugeTransform phi = integ_limit(e1, ell, M);
    const auto phi_inv = mat_invert(phi.g, M);

    auto lower = series_identity(fld, n);
    lower.set_block(r, 0, c);
    auto lower_inv = series_identity(fld, n);
    lower_inv.set_block(r, 0, -c);
    const auto d = detail::embed(phi_inv, n, 0), d_inv = detail::embed(phi.g, n, 0);
    bf.g = {a * lower * d, d_inv * lower_inv * lift(invert(sd.basis_change))};
    bf.e0 = constant_part(e1);
    bf.f_block = phi.g * fb;
    bf.h_block = h1;
    bf.c = c;
    return bf;
}

// ---------------------------------------------------------------------------
// Degree one.

struct DegreeOneClass
{
    /// a_p, the leading coefficient of f_p.
    std::map<long, Scalar> character;
    /// m_p / (p - 1) reduced into [0, 1); its denominator divides d(S).
    rational slope;
};

struct DegreeOneResult
{
    DegreeOneClass cls;
    /// Twisting by this gauge turns f_p into a_p t^{exponents[p]}.
    GaugeTransform gauge;
    std::map<long, long> exponents;
};

inline DegreeOneResult classify_degree_one(const SemigroupCocycle &c, long M = default_precision)
{
    if (c.dim != 1) {
        throw DimMismatch("classify_degree_one needs a 1-dimensional cocycle, got dimension " + std::to_string(c.dim));
    }
    const FieldDescriptor fld = c.field();
    const auto &gens = c.semigroup.generators();
    DegreeOneResult res;
    std::map<long, long> m;
    std::optional<rational> slope;
    for (long p : gens) {
        const LaurentSeries &f = c.at(p)(0, 0);
        if (f.is_zero()) {
            throw IndistinguishableFromZero("f_" + std::to_string(p) + " is zero within precision");
        }
        res.cls.character.emplace(p, f.coeffs().front());
        m[p] = f.valuation();
        rational s(m[p], p - 1);
        s.canonicalize();
        if (slope && rational(s - *slope).get_den() != 1) {
            throw NotACocycle("slopes " + slope->get_str() + " and " + s.get_str() + " (at " + std::to_string(p)
                              + ") disagree modulo Z");
        }
        if (!slope) {
            slope = s;
        }
    }
    const long p0 = gens.front();
    integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), slope->get_num_mpz_t(), slope->get_den_mpz_t());
    res.cls.slope = *slope - rational(fl);
    if (static_cast<long>(res.cls.slope.get_den().get_si()) > 0
        && c.semigroup.d() % res.cls.slope.get_den().get_si() != 0) {
        throw NotACocycle("slope denominator " + res.cls.slope.get_den().get_str() + " does not divide d(S) = "
                          + std::to_string(c.semigroup.d()));
    }
    // kill the unit part 1 + t k[[t]] of f_{p0}
    const LaurentSeries &f0 = c.at(p0)(0, 0);
    const LaurentSeries unit = f0.shifted(-m[p0]).scaled(res.cls.character.at(p0).inverse());
    auto phi_in = series_zero(fld, 1, 1);
    phi_in(0, 0) = unit;
    const long work = std::min(unit.prec(), M);
    const LaurentSeries phi = integ_limit(phi_in, p0, std::max(work, 1L)).g(0, 0);
    const long shift = -fl.get_si();
    auto g = series_zero(fld, 1, 1), gi = series_zero(fld, 1, 1);
    g(0, 0) = phi.inverse(M).shifted(shift);
    gi(0, 0) = phi.shifted(-shift);
    res.gauge = {g, gi};
    for (long p : gens) {
        res.exponents[p] = m[p] + shift * (p - 1);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Cyclic vectors and companion matrices.

/// Last column h_0..h_{N-1} of the companion matrix of sigma_p. After
/// rescale_companion, `shift` and `substitution` record the rescaling applied to
/// the cyclic vector: v' = t^shift sigma_substitution(v).
struct CompanionData
{
    SeriesVector h;
    long p = 0;
    long shift = 0;
    long substitution = 1;
};

inline SeriesMatrix companion_matrix(const CompanionData &cd)
{
    const std::size_t n = cd.h.size();
    auto m = series_zero(cd.h.front().field(), n, n);
    for (std::size_t i = 1; i < n; ++i) {
        m(i, i - 1) = LaurentSeries::exact(Scalar(cd.h.front().field(), 1L));
    }
    for (std::size_t i = 0; i < n; ++i) {
        m(i, n - 1) = cd.h[i];
    }
    return m;
}

struct CyclicVectorResult
{
    SeriesVector v;
    /// Columns v, sigma v, ..., sigma^{N-1} v.
    GaugeTransform basis_change;
    CompanionData companion;
    /// Number of candidates tried, including the successful one.
    long trials = 0;
};

namespace detail
{

inline SeriesVector cyclic_candidate(const FieldDescriptor &f, std::size_t n, long trial, std::mt19937_64 &rng)
{
    SeriesVector v(n, LaurentSeries::zero(f, exact_precision));
    if (trial == 0) {
        v[0] = LaurentSeries::exact(Scalar(f, 1L));
        return v;
    }
    if (trial == 1) {
        for (auto &x : v) {
            x = LaurentSeries::exact(Scalar(f, 1L));
        }
        return v;
    }
    for (auto &x : v) {
        std::vector<Scalar> c;
        for (int e = -2; e <= 2; ++e) {
            c.emplace_back(f, uniform(rng, -2, 2));
        }
        x = LaurentSeries::from_coeffs(f, -2, std::move(c), exact_precision);
    }
    return v;
}

} // namespace detail

/// Searches e_1, the all-ones vector, then seeded random Laurent polynomials
/// for a vector whose sigma_p-orbit spans k((t))^N.
inline CyclicVectorResult cyclic_vector(const SemigroupCocycle &c, long p, long max_trials = 20, std::uint64_t seed = 0)
{
    const std::size_t n = c.dim;
    const SeriesMatrix &f = c.at(p);
    const FieldDescriptor fld = c.field();
    const long inv_prec = c.precision() >= exact_precision ? default_precision : std::max(default_precision, c.precision());
    std::mt19937_64 rng(seed);
    for (long trial = 0; trial < max_trials; ++trial) {
        const SeriesVector v = detail::cyclic_candidate(fld, n, trial, rng);
        std::vector<SeriesVector> orbit{v};
        for (std::size_t i = 0; i < n; ++i) {
            orbit.push_back(detail::sigma(f, p, orbit.back()));
        }
        const SeriesMatrix b = series_from_columns(fld, n, {orbit.begin(), orbit.end() - 1});
        SeriesMatrix binv;
        try {
            binv = mat_invert(b, inv_prec);
        } catch (const error &) {
            continue;
        }
        SeriesVector h = mat_vec(binv, orbit.back());
        if (h.front().is_zero()) {
            continue;
        }
        return {v, {b, binv}, {std::move(h), p}, trial + 1};
    }
    throw CyclicSearchFailed("no cyclic vector for sigma_" + std::to_string(p) + " after "
                             + std::to_string(max_trials) + " candidates; raise the precision or --trials");
}

/// Replaces the cyclic vector v by t^shift sigma_L(v), L = p^{N-1} l, so that
/// the new companion column is integral with some unit entry:
/// h'_j = t^{L alpha (p^N - p^j)} h_j(t^L), alpha = max_j v(h_j) / (p^j - p^N).
inline CompanionData rescale_companion(const CompanionData &cd, long ell)
{
    const long p = cd.p;
    const long n = static_cast<long>(cd.h.size());
    long need = 1;
    for (long j = 1; j <= n; ++j) {
        need = std::lcm(need, detail::ipow(p, j) - 1);
    }
    if (ell % need != 0) {
        throw DivisibilityViolated("rescale_companion: " + std::to_string(ell) + " is not divisible by lcm(p-1..p^N-1) = "
                                   + std::to_string(need));
    }
    const long pn = detail::ipow(p, n);
    std::optional<rational> alpha;
    for (long j = 0; j < n; ++j) {
        const auto &h = cd.h[static_cast<std::size_t>(j)];
        if (h.is_zero()) {
            continue;
        }
        rational a(h.valuation(), detail::ipow(p, j) - pn);
        a.canonicalize();
        if (!alpha || a > *alpha) {
            alpha = a;
        }
    }
    if (!alpha) {
        throw SingularWithinPrecision("rescale_companion: companion column is zero");
    }
    const long L = detail::ipow(p, n - 1) * ell;
    const rational shift_q = *alpha * L;
    if (shift_q.get_den() != 1) {
        throw DivisibilityViolated("rescale_companion: shift " + shift_q.get_str() + " is not integral");
    }
    const long shift = shift_q.get_num().get_si();
    CompanionData out{{}, p, cd.shift * L + shift, cd.substitution * L};
    for (long j = 0; j < n; ++j) {
        const long e = shift * (pn - detail::ipow(p, j));
        out.h.push_back(cd.h[static_cast<std::size_t>(j)].substitute_power(L).shifted(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solutions of sigma_p x = lambda x.

/// A k-basis of {x in k((t))^N : f(t) x(t^p) = lambda x}. Every solution has
/// valuation in [v(f^-1)/(p-1), -v(f)/(p-1)], so the coefficients in that window
/// solve a finite linear system and the rest follow by recursion. Solutions are
/// returned modulo t^{P + p a}, P the precision of f and a the window start.
inline std::vector<SeriesVector> eigen_solutions(const SeriesMatrix &f, long p, const Scalar &lambda)
{
    const std::size_t n = f.rows();
    const FieldDescriptor fld = field_of(f);
    const long prec = min_prec(f);
    if (prec >= exact_precision) {
        throw PreconditionViolated("eigen_solutions needs a finite precision");
    }
    const long vf = min_valuation(f);
    const long vinv = min_valuation(mat_invert(f, std::max(default_precision, prec)));
    auto floor_div = [](long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    const long lo = floor_div(vinv, p - 1);
    const long hi = -floor_div(vf, p - 1);
    const long top = prec + p * lo - 1;
    if (top < hi) {
        throw NotExtendable("precision " + std::to_string(prec) + " is too low to solve sigma_" + std::to_string(p)
                            + " x = lambda x");
    }
    // coefficient F_{rk,i}
    auto fc = [&](std::size_t r, std::size_t k, long i) {
        const auto &x = f(r, k);
        return (i < x.min_exponent() || i >= x.prec()) ? Scalar(fld) : x.coeff(i);
    };
    const long width = hi - lo + 1;
    auto col = [&](std::size_t k, long j) { return static_cast<std::size_t>(k) * static_cast<std::size_t>(width)
                                                   + static_cast<std::size_t>(j - lo); };
    const long eq_lo = p * lo + vf;
    const std::size_t rows = n * static_cast<std::size_t>(hi - eq_lo + 1);
    ConstantMatrix sys = constant_zero(fld, rows, n * static_cast<std::size_t>(width));
    std::size_t row = 0;
    for (std::size_t r = 0; r < n; ++r) {
        for (long e = eq_lo; e <= hi; ++e, ++row) {
            for (std::size_t k = 0; k < n; ++k) {
                for (long j = lo; j <= hi; ++j) {
                    const Scalar c = fc(r, k, e - p * j);
                    if (!c.is_zero()) {
                        sys(row, col(k, j)) += c;
                    }
                }
            }
            if (e >= lo) {
                sys(row, col(r, e)) -= lambda;
            }
        }
    }
    const Scalar linv = lambda.inverse();
    std::vector<SeriesVector> out;
    for (const auto &kv : kernel_basis(sys)) {
        // coefficients x[k][j - lo] for j in [lo, top]
        std::vector<std::vector<Scalar>> x(n, std::vector<Scalar>(static_cast<std::size_t>(top - lo + 1), Scalar(fld)));
        for (std::size_t k = 0; k < n; ++k) {
            for (long j = lo; j <= hi; ++j) {
                x[k][static_cast<std::size_t>(j - lo)] = kv[col(k, j)];
            }
        }
        for (long e = hi + 1; e <= top; ++e) {
            for (std::size_t r = 0; r < n; ++r) {
                Scalar acc(fld);
                for (std::size_t k = 0; k < n; ++k) {
                    for (long j = lo; p * j + vf <= e && j < e; ++j) {
                        const auto &xj = x[k][static_cast<std::size_t>(j - lo)];
                        if (!xj.is_zero()) {
                            acc += fc(r, k, e - p * j) * xj;
                        }
                    }
                }
                x[r][static_cast<std::size_t>(e - lo)] = acc * linv;
            }
        }
        SeriesVector v;
        for (std::size_t k = 0; k < n; ++k) {
            v.push_back(LaurentSeries::from_coeffs(fld, lo, std::move(x[k]), top + 1));
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Certificates.

namespace detail
{

// Twists c by gauge, reads the constants and checks them against the original
// cocycle; throws NotExtendable when the gauged values are not constant.
inline TrivializationCertificate certify(const SemigroupCocycle &c, const SeriesMatrix &gauge, long M)
{
    TrivializationCertificate cert{{gauge, std::nullopt}, {c.semigroup, c.dim, {}}, 0};
    const SeriesMatrix gi = cert.gauge.inverse(M);
    long prec = M;
    std::map<long, SeriesMatrix> gauged;
    for (const auto &[p, f] : c.values) {
        gauged.emplace(p, gi * f * substitute_power(gauge, p));
        prec = std::min(prec, min_prec(gauged.at(p)));
    }
    if (prec <= 0) {
        throw NotExtendable("gauged cocycle is known only modulo t^" + std::to_string(prec)
                            + "; raise the precision");
    }
    for (const auto &[p, g] : gauged) {
        const auto k = constant_part(g);
        if (const auto d = first_difference(truncated(g, prec), lift(k))) {
            throw NotExtendable("gauged value at " + std::to_string(p) + " is not constant: t^" + std::to_string(*d)
                                + " survives");
        }
        cert.constant.values.emplace(p, k);
    }
    cert.checked_precision = prec;
    const auto rep = verify_certificate(c, cert);
    if (!rep.ok) {
        throw NotExtendable("certificate check failed: " + rep.message);
    }
    return cert;
}

inline long coprime_generator(const Semigroup &s)
{
    for (long a : s.generators()) {
        for (long b : s.generators()) {
            if (a != b && std::gcd(a, b) == 1) {
                return a;
            }
        }
    }
    throw MissingCoprimePair("semigroup has no pair of coprime generators");
}

} // namespace detail

/// Reduces an upper triangular cocycle with constant diagonal to constants by
/// peeling one column at a time.
inline TrivializationCertificate diag_to_constant(const SemigroupCocycle &c, long M = default_precision)
{
    const long ell = detail::coprime_generator(c.semigroup);
    const std::size_t n = c.dim;
    const FieldDescriptor fld = c.field();
    SemigroupCocycle cur = c;
    for (auto &[p, f] : cur.values) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const auto &x = f(i, j);
                const bool ok = (i == j) ? x.is_constant() && x.prec() > 0 && !x.is_zero() : x.is_zero();
                if (!ok) {
                    throw PreconditionViolated("diag_to_constant: value at " + std::to_string(p) + " entry ("
                                               + std::to_string(i) + "," + std::to_string(j)
                                               + ") breaks the triangular shape");
                }
                f(i, j) = i == j ? LaurentSeries::exact(x.constant_term()) : LaurentSeries::zero(fld, exact_precision);
            }
        }
    }
    GaugeTransform total = identity_gauge(fld, n);
    for (std::size_t j = 1; j < n; ++j) {
        const ConstantMatrix a_inv = invert(constant_part(cur.at(ell).block(0, 0, j, j)));
        // h t^{l m} ~ A^-1 h d t^m: push principal parts to exponents prime to l
        for (;;) {
            const auto &fl = cur.at(ell);
            std::optional<long> worst;
            for (std::size_t i = 0; i < j; ++i) {
                const auto &x = fl(i, j);
                for (long e = x.min_exponent(); !x.is_zero() && e < 0; ++e) {
                    if (e % ell == 0 && !x.coeff(e).is_zero()) {
                        worst = worst ? std::min(*worst, e) : e;
                        break;
                    }
                }
            }
            if (!worst) {
                break;
            }
            std::vector<Scalar> h;
            for (std::size_t i = 0; i < j; ++i) {
                h.push_back(fl(i, j).min_exponent() <= *worst ? fl(i, j).coeff(*worst) : Scalar(fld));
            }
            auto g = series_identity(fld, n), gi = series_identity(fld, n);
            for (std::size_t i = 0; i < j; ++i) {
                Scalar ci(fld);
                for (std::size_t k = 0; k < j; ++k) {
                    ci -= a_inv(i, k) * h[k];
                }
                g(i, j) = LaurentSeries::exact(ci, *worst / ell);
                gi(i, j) = LaurentSeries::exact(-ci, *worst / ell);
            }
            cur = twist(cur, {g, gi});
            total = compose(total, {g, gi});
        }
        for (std::size_t i = 0; i < j; ++i) {
            const auto &x = cur.at(ell)(i, j);
            if (!x.is_zero() && x.min_exponent() < 0) {
                throw NotExtendable("diag_to_constant: column " + std::to_string(j) + " keeps the principal part "
                                    + x.to_string() + " at generator " + std::to_string(ell));
            }
        }
        const auto blk = cur.at(ell).block(0, 0, j + 1, j + 1);
        const long work = std::max(1L, std::min(M, min_prec(blk)));
        const auto phi = integ_limit(blk, ell, work);
        const SeriesMatrix g = detail::embed(mat_invert(phi.g, work), n, 0), gi = detail::embed(phi.g, n, 0);
        cur = twist(cur, {g, gi});
        total = compose(total, {g, gi});
        for (auto &[p, f] : cur.values) {
            for (std::size_t i = 0; i < j; ++i) {
                f(i, j) = LaurentSeries::exact(f(i, j).prec() > 0 ? f(i, j).constant_term() : Scalar(fld));
            }
        }
    }
    return detail::certify(c, total.g, M);
}

// ---------------------------------------------------------------------------
// Full pipeline.

struct TrivializeOptions
{
    long max_trials = 20;
    std::uint64_t seed = 0;
};

namespace detail
{

// Generators (p, l) with lcm(p-1, ..., p^N-1) | l and l >= p.
inline std::optional<std::pair<long, long>> rescaling_pair(const Semigroup &s, std::size_t n)
{
    for (long p : s.generators()) {
        long need = 1;
        for (long j = 1; j <= static_cast<long>(n); ++j) {
            need = std::lcm(need, ipow(p, j) - 1);
        }
        for (long ell : s.generators()) {
            if (ell >= p && ell % need == 0) {
                return std::make_pair(p, ell);
            }
        }
    }
    return std::nullopt;
}

inline std::string poly_message(const ConstantMatrix &m)
{
    return poly_to_string(characteristic_polynomial(m));
}

// Common invariant flag of a commuting family of constant matrices:
// T^-1 M_q T is upper triangular for every q.
inline ConstantMatrix simultaneous_triangularize(const std::vector<ConstantMatrix> &family, const FieldDescriptor &f,
                                                 std::size_t n)
{
    if (n <= 1) {
        return constant_identity(f, n);
    }
    // shrink k^n to a common eigenspace
    ConstantMatrix basis = constant_identity(f, n);
    for (const auto &m : family) {
        const ConstantMatrix full = complete_basis(f, n, [&] {
            std::vector<std::vector<Scalar>> cols;
            for (std::size_t j = 0; j < basis.cols(); ++j) {
                cols.push_back(basis.column(j));
            }
            return cols;
        }());
        const std::size_t d = basis.cols();
        const ConstantMatrix restricted = (invert(full) * m * full).block(0, 0, d, d);
        const auto eig = eigenvector_in_field(restricted);
        if (!eig) {
            throw FieldExtensionRequired("no eigenvalue in " + f.name() + " for characteristic polynomial "
                                         + poly_message(restricted));
        }
        ConstantMatrix shifted = restricted;
        for (std::size_t i = 0; i < d; ++i) {
            shifted(i, i) -= eig->value;
        }
        basis = basis * from_columns(f, d, kernel_basis(shifted));
    }
    const ConstantMatrix t = complete_basis(f, n, {basis.column(0)});
    const ConstantMatrix ti = invert(t);
    std::vector<ConstantMatrix> quotient;
    for (const auto &m : family) {
        quotient.push_back((ti * m * t).block(1, 1, n - 1, n - 1));
    }
    return t * block_diagonal(constant_identity(f, 1), simultaneous_triangularize(quotient, f, n - 1));
}

struct Reduction
{
    SeriesMatrix gauge;
    /// Block upper triangular with exactly constant diagonal blocks and exact
    /// zeros below them.
    SemigroupCocycle reduced;
    std::vector<std::size_t> blocks;
};

// Replaces c by the cocycle with constant values (c is constant within precision).
inline SemigroupCocycle exact_constants(const SemigroupCocycle &c)
{
    SemigroupCocycle r{c.semigroup, c.dim, {}};
    for (const auto &[p, f] : c.values) {
        r.values.emplace(p, lift(constant_part(f)));
    }
    return r;
}

inline Reduction reduce_to_block_triangular(const SemigroupCocycle &c, long M, const TrivializeOptions &opt)
{
    const std::size_t n = c.dim;
    const FieldDescriptor fld = c.field();
    if (is_constant_cocycle(c)) {
        return {series_identity(fld, n), exact_constants(c), {n}};
    }
    if (n == 1) {
        const auto d1 = classify_degree_one(c, M);
        for (const auto &[p, e] : d1.exponents) {
            if (e != 0) {
                throw NotExtendable("degree-one part has slope " + d1.cls.slope.get_str() + ", not trivial");
            }
        }
        SemigroupCocycle r{c.semigroup, 1, {}};
        for (const auto &[p, a] : d1.cls.character) {
            auto m = series_zero(fld, 1, 1);
            m(0, 0) = LaurentSeries::exact(a);
            r.values.emplace(p, m);
        }
        return {d1.gauge.g, r, {1}};
    }
    const auto pl = rescaling_pair(c.semigroup, n);
    if (!pl) {
        throw PreconditionViolated("no generators p, l with lcm(p-1..p^N-1) | l for N = " + std::to_string(n));
    }
    const auto [p, ell] = *pl;

    // eigenvalue of sigma_p from the constant block of the rescaled companion
    const auto cv = cyclic_vector(c, p, opt.max_trials, opt.seed);
    const auto rc = rescale_companion(cv.companion, ell);
    const long work = M;
    const BlockForm bf = block_triangularize(truncated(companion_matrix(rc), work), p, work);
    if (bf.split_dim == 0) {
        throw NotExtendable("rescaled companion is nilpotent at t = 0");
    }
    const auto eig = eigenvector_in_field(bf.e0);
    if (!eig) {
        throw FieldExtensionRequired("no eigenvalue in " + fld.name() + " for characteristic polynomial "
                                     + poly_message(bf.e0));
    }
    // ker(sigma_p - lambda) is stable under every sigma_q
    std::vector<SeriesVector> k = eigen_solutions(c.at(p), p, eig->value);
    if (k.empty()) {
        throw NotExtendable("no solution of sigma_" + std::to_string(p) + " x = " + eig->value.to_string()
                            + " x within precision");
    }
    if (series_rank(series_from_columns(fld, n, k)) < k.size()) {
        throw SingularWithinPrecision("solutions of sigma_" + std::to_string(p) + " x = lambda x are dependent over k((t))");
    }
    const std::size_t r = k.size();
    // Complete with unit vectors. The quotient block has det valuation
    // v(det f_p) + (p-1) v(det g2); keep the completion that brings it closest
    // to zero, which keeps the later gauges small.
    const auto vf = series_det_valuation(c.at(p));
    if (!vf) {
        throw SingularWithinPrecision("f_" + std::to_string(p) + " is singular within precision");
    }
    std::optional<SeriesMatrix> g2_best;
    long best_score = 0;
    std::vector<bool> pick(n, false);
    std::fill(pick.end() - static_cast<std::ptrdiff_t>(n - r), pick.end(), true);
    do {
        auto cand = k;
        for (std::size_t e = 0; e < n; ++e) {
            if (pick[e]) {
                SeriesVector unit(n, LaurentSeries::zero(fld, exact_precision));
                unit[e] = LaurentSeries::exact(Scalar(fld, 1L));
                cand.push_back(std::move(unit));
            }
        }
        const SeriesMatrix m = series_from_columns(fld, n, cand);
        if (const auto vg = series_det_valuation(m)) {
            const long score = std::abs(*vf + (p - 1) * *vg);
            if (!g2_best || score < best_score) {
                g2_best = m;
                best_score = score;
            }
        }
    } while (std::next_permutation(pick.begin(), pick.end()));
    if (!g2_best) {
        throw SingularWithinPrecision("could not complete the invariant subspace to a basis");
    }
    const SeriesMatrix g2 = *g2_best;
    const GaugeTransform g2t{g2, mat_invert(g2, std::max(default_precision, M))};
    const SemigroupCocycle c2 = twist(c, g2t);

    SemigroupCocycle top{c.semigroup, r, {}}, rest{c.semigroup, n - r, {}};
    std::map<long, SeriesMatrix> upper;
    for (const auto &[q, f] : c2.values) {
        const auto a = f.block(0, 0, r, r);
        if (min_prec(a) <= 0 || !is_constant(a)) {
            throw NotExtendable("invariant block at " + std::to_string(q) + " is not constant within precision");
        }
        top.values.emplace(q, lift(constant_part(a)));
        upper.emplace(q, f.block(0, r, r, n - r));
        rest.values.emplace(q, f.block(r, r, n - r, n - r));
    }
    if (r == n) {
        return {g2, top, {n}};
    }
    const Reduction sub = reduce_to_block_triangular(rest, M, opt);
    Reduction out;
    out.gauge = g2 * block_diagonal(series_identity(fld, r), sub.gauge);
    out.reduced = {c.semigroup, n, {}};
    for (const auto &[q, a] : top.values) {
        auto m = series_zero(fld, n, n);
        m.set_block(0, 0, a);
        m.set_block(0, r, upper.at(q) * substitute_power(sub.gauge, q));
        m.set_block(r, r, sub.reduced.at(q));
        out.reduced.values.emplace(q, m);
    }
    out.blocks = {r};
    out.blocks.insert(out.blocks.end(), sub.blocks.begin(), sub.blocks.end());
    return out;
}

} // namespace detail

/// Gauge transform to a constant representation, verified before returning.
inline TrivializationCertificate trivialize(const SemigroupCocycle &c_in, long M = default_precision,
                                            const TrivializeOptions &opt = {})
{
    SemigroupCocycle c = c_in;
    for (auto &[p, f] : c.values) {
        f = truncated(f, M);
    }
    const FieldDescriptor fld = c.field();
    const std::size_t n = c.dim;
    if (detail::is_constant_cocycle(c)) {
        return detail::certify(c, series_identity(fld, n), M);
    }
    try {
        detail::coprime_generator(c.semigroup);
    } catch (const MissingCoprimePair &e) {
        throw PreconditionViolated(std::string("trivialize: ") + e.what());
    }
    if (!detail::rescaling_pair(c.semigroup, n)) {
        throw PreconditionViolated("semigroup " + [&] {
            std::string s;
            for (long g : c.semigroup.generators()) {
                s += (s.empty() ? "" : ",") + std::to_string(g);
            }
            return s;
        }() + " has no generators p, l with lcm(p-1..p^N-1) | l for N = " + std::to_string(n));
    }
    const auto red = detail::reduce_to_block_triangular(c, M, opt);

    // triangularize each constant diagonal block family
    SeriesMatrix tri = series_identity(fld, 0);
    std::size_t offset = 0;
    for (std::size_t b : red.blocks) {
        std::vector<ConstantMatrix> family;
        for (const auto &[q, f] : red.reduced.values) {
            family.push_back(constant_part(f.block(offset, offset, b, b)));
        }
        tri = block_diagonal(tri, lift(detail::simultaneous_triangularize(family, fld, b)));
        offset += b;
    }
    const SemigroupCocycle upper = twist(red.reduced, {tri, std::nullopt});
    SemigroupCocycle cleaned{upper.semigroup, n, {}};
    for (const auto &[q, f] : upper.values) {
        auto m = f;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                m(i, j) = LaurentSeries::zero(fld, exact_precision);
            }
            m(i, i) = LaurentSeries::exact(f(i, i).constant_term());
        }
        offset = 0;
        for (std::size_t b : red.blocks) {
            for (std::size_t i = offset; i < offset + b; ++i) {
                for (std::size_t j = i; j < offset + b; ++j) {
                    m(i, j) = LaurentSeries::exact(f(i, j).constant_term());
                }
            }
            offset += b;
        }
        cleaned.values.emplace(q, m);
    }
    const auto dc = diag_to_constant(cleaned, M);
    return detail::certify(c, red.gauge * tri * dc.gauge.g, M);
}

} // namespace semilin

#endif
