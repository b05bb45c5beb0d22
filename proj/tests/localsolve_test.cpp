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

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include <semilin/localsolve.hpp>

#include "test_util.hpp"

using namespace semilin;
using semilin_test::q;
using semilin_test::qs;

namespace
{

const FieldDescriptor Q = FieldDescriptor::rationals();

LaurentSeries ex(long c, long e = 0, const FieldDescriptor &f = Q) { return LaurentSeries::exact(Scalar(f, c), e); }

SeriesMatrix sm(std::vector<std::vector<LaurentSeries>> rows)
{
    auto m = series_zero(rows[0][0].field(), rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

ConstantMatrix cm(std::vector<std::vector<long>> rows, const FieldDescriptor &f = Q)
{
    auto m = constant_zero(f, rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(i, j) = Scalar(f, rows[i][j]);
        }
    }
    return m;
}

SemigroupCocycle one_dim(const Semigroup &s, std::map<long, LaurentSeries> v)
{
    SemigroupCocycle c{s, 1, {}};
    for (auto &[p, x] : v) {
        c.values.emplace(p, sm({{x}}));
    }
    return c;
}

// Random integral matrix whose constant term is `f0`.
SeriesMatrix random_integral(std::mt19937_64 &rng, const ConstantMatrix &f0, long prec)
{
    const std::size_t n = f0.rows();
    auto m = series_zero(Q, n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<Scalar> c{f0(i, j)};
            for (long e = 1; e < prec; ++e) {
                c.push_back(semilin_test::random_scalar(rng, Q, 2));
            }
            m(i, j) = LaurentSeries::from_coeffs(Q, 0, std::move(c), prec);
        }
    }
    return m;
}

ConstantMatrix random_invertible(std::mt19937_64 &rng, std::size_t n)
{
    for (;;) {
        auto a = constant_zero(Q, n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) = Scalar(Q, static_cast<long>(rng() % 7) - 3);
            }
        }
        if (!determinant(a).is_zero()) {
            return a;
        }
    }
}

std::vector<std::vector<Scalar>> char_polys(const std::map<long, ConstantMatrix> &v)
{
    std::vector<std::vector<Scalar>> out;
    for (const auto &[p, m] : v) {
        out.push_back(characteristic_polynomial(m));
    }
    return out;
}

} // namespace

TEST_CASE("integ_limit examples")
{
    // (1 - t)(1 + t)(1 - t^2)^-1 = 1
    const auto phi = integ_limit(sm({{qs(0, {1, 1}, 8)}}), 2, 8);
    CHECK(phi.g(0, 0) == qs(0, {1, -1, 0, 0, 0, 0, 0, 0}, 8));

    const auto c = lift(cm({{2, 1}, {0, 3}}));
    CHECK(equals_within_precision(integ_limit(c, 3, 20).g, series_identity(Q, 2)));

    const auto d = integ_limit(sm({{qs(0, {1, 1}, 8), ex(0)}, {ex(0), ex(2)}}), 2, 8);
    CHECK(d.g(0, 0) == qs(0, {1, -1, 0, 0, 0, 0, 0, 0}, 8));
    CHECK(d.g(1, 1).truncated(8) == qs(0, {1, 0, 0, 0, 0, 0, 0, 0}, 8));
    CHECK(d.g(0, 1).is_zero());

    CHECK_THROWS_AS(integ_limit(sm({{qs(-1, {1, 1}, 8)}}), 2, 8), NotIntegral);
    CHECK_THROWS_AS(integ_limit(sm({{qs(1, {1}, 8)}}), 2, 8), SingularAtZero);
}

TEST_CASE("integ_limit identity on random input")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 16; ++trial) {
        const std::size_t n = 1 + trial % 4;
        const long p = 2 + trial % 3;
        const auto f = random_integral(rng, random_invertible(rng, n), 64);
        const auto phi = integ_limit(f, p, 64).g;
        const auto lhs = phi * f;
        const auto rhs = lift(constant_part(f)) * substitute_power(phi, p);
        CHECK(min_prec(lhs) >= 64);
        CHECK(min_prec(rhs) >= 64);
        CHECK_FALSE(first_difference(lhs, rhs));
        CHECK(constant_part(phi) == constant_identity(Q, n));
    }
}

TEST_CASE("block_triangularize on [[1,t],[t,t]]")
{
    const auto f = sm({{ex(1), ex(1, 1)}, {ex(1, 1), ex(1, 1)}});
    // C_1 = (t + t C_0(t^2)) (1 + t C_0(t^2))^-1 with C_0 = t
    const auto c1 = (qs(1, {1, 0, 1}, 8) * qs(0, {1, 0, 0, 1}, 8).inverse(8)).truncated(8);
    CHECK(c1 == qs(1, {1, 0, 1, -1, 0, -1, 1}, 8));

    const auto bf = block_triangularize(f, 2, 8);
    CHECK(bf.split_dim == 1);
    REQUIRE_FALSE(bf.steps.empty());
    // C_1 and C_0 differ first at t^3, beyond the guaranteed t^2
    CHECK(bf.steps[0].modulus == 2);
    CHECK(bf.steps[0].first_difference == 3);
    for (const auto &s : bf.steps) {
        CHECK((!s.first_difference || *s.first_difference >= s.modulus));
    }
    CHECK(bf.e0 == cm({{1}}));
    CHECK(constant_part(bf.h_block) == cm({{0}}));
    const auto lhs = mat_invert(bf.g.g, 16) * f * substitute_power(bf.g.g, 2);
    CHECK(equals_within_precision(truncated(lhs, 8), bf.assembled()));
}

TEST_CASE("block_triangularize degenerate splits")
{
    const auto inv = sm({{qs(0, {1, 1}, 10), ex(0)}, {ex(0), ex(3)}});
    const auto a = block_triangularize(inv, 2, 10);
    CHECK(a.split_dim == 2);
    CHECK(a.h_block.rows() == 0);
    CHECK(a.e0 == cm({{1, 0}, {0, 3}}));

    const auto nil = sm({{ex(0), ex(1)}, {ex(1, 1), ex(0)}});
    const auto b = block_triangularize(nil, 2, 10);
    CHECK(b.split_dim == 0);
    CHECK(b.steps.empty());
    CHECK(equals_within_precision(b.h_block, nil));

    CHECK_THROWS_AS(block_triangularize(sm({{qs(-1, {1}, 5)}}), 2, 5), NotIntegral);
}

TEST_CASE("block_triangularize contraction on random singular f(0)")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 2 + trial % 3;
        // f(0) = P diag(1, .., 1, 0) P^-1 up to a nilpotent tail
        auto d = constant_zero(Q, n, n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            d(i, i) = Scalar(Q, static_cast<long>(i) + 1);
        }
        const auto p = random_invertible(rng, n);
        const auto f = random_integral(rng, p * d * invert(p), 32);
        const long ell = 2 + trial % 2;
        const auto bf = block_triangularize(f, ell, 32);
        CHECK(bf.split_dim == n - 1);
        for (const auto &s : bf.steps) {
            CHECK((!s.first_difference || *s.first_difference >= s.modulus));
        }
        CHECK(determinant(bf.e0) != Scalar(Q));
        const auto h0 = constant_part(bf.h_block);
        CHECK(matrix_power(h0, h0.rows()) == constant_zero(Q, h0.rows(), h0.rows()));
        const auto lhs = mat_invert(bf.g.g, 64) * f * substitute_power(bf.g.g, ell);
        CHECK(equals_within_precision(lhs, bf.assembled()));
        CHECK(min_prec(lhs) > 0);
    }
}

TEST_CASE("classify_degree_one examples")
{
    const auto a = classify_degree_one(one_dim(Semigroup({2}), {{2, ex(1, 1)}}));
    CHECK(a.cls.slope == 0);
    CHECK(equals_within_precision(a.gauge.g, sm({{ex(1, -1)}})));
    CHECK(equals_within_precision(twist(one_dim(Semigroup({2}), {{2, ex(1, 1)}}), a.gauge).at(2), sm({{ex(1)}})));

    const auto b = classify_degree_one(one_dim(Semigroup({3}), {{3, ex(1, 1)}}));
    CHECK(b.cls.slope == q(1, 2));
    CHECK(b.exponents.at(3) == 1);

    const auto c = classify_degree_one(one_dim(Semigroup({2, 3}), {{2, ex(1, 1)}, {3, ex(1, 2)}}));
    CHECK(c.cls.slope == 0);
    CHECK(equals_within_precision(c.gauge.g, sm({{ex(1, -1)}})));
    CHECK(c.exponents.at(2) == 0);
    CHECK(c.exponents.at(3) == 0);

    // the unit part is removed too: f_2 = 5 t (1 + t)
    const auto u = classify_degree_one(one_dim(Semigroup({2}), {{2, qs(1, {5, 5}, 30)}}), 30);
    CHECK(u.cls.character.at(2) == Scalar(Q, 5L));
    const auto tw = twist(one_dim(Semigroup({2}), {{2, qs(1, {5, 5}, 30)}}), u.gauge);
    CHECK(equals_within_precision(tw.at(2), sm({{ex(5)}})));

    CHECK_THROWS_AS(classify_degree_one(one_dim(Semigroup({2, 3}), {{2, ex(1, 0)}, {3, ex(1, 1)}})), NotACocycle);
}

TEST_CASE("degree-one class is twist invariant")
{
    std::mt19937_64 rng(31);
    for (long p : {2L, 3L}) {
        const auto base = one_dim(Semigroup({p}), {{p, ex(1, 1)}});
        const auto ref = classify_degree_one(base, 40);
        for (int k = 0; k < 20; ++k) {
            const long a = static_cast<long>(rng() % 7) - 3;
            const Scalar u(Q, static_cast<long>(rng() % 5) + 1);
            std::vector<Scalar> c{u};
            for (int e = 1; e < 6; ++e) {
                c.push_back(semilin_test::random_scalar(rng, Q, 2));
            }
            const GaugeTransform g{sm({{LaurentSeries::from_coeffs(Q, a, std::move(c), exact_precision)}}),
                                   std::nullopt};
            const auto tw = twist(base, g);
            const auto cls = classify_degree_one(tw, 40);
            CHECK(cls.cls.slope == ref.cls.slope);
            // the leading u of g and g(t^p) cancel, so a'_p = a_p (u = 1 in a'_p = a_p u^{p-1})
            CHECK(cls.cls.character.at(p) == ref.cls.character.at(p));
        }
    }
}

TEST_CASE("cyclic_vector examples")
{
    SemigroupCocycle d{Semigroup({2, 3}), 2, {}};
    d.values.emplace(2, lift(cm({{1, 0}, {0, 2}})));
    d.values.emplace(3, lift(cm({{1, 0}, {0, 3}})));
    const auto cv = cyclic_vector(d, 2);
    // e_1 is fixed by sigma_2, so the all-ones vector is next
    CHECK(cv.trials == 2);
    CHECK(cv.v == SeriesVector{ex(1), ex(1)});
    CHECK(cv.basis_change.g == sm({{ex(1), ex(1)}, {ex(1), ex(2)}}));
    REQUIRE(cv.companion.h.size() == 2);
    CHECK(cv.companion.h[0] == ex(-2));
    CHECK(cv.companion.h[1] == ex(3));

    const auto one = cyclic_vector(one_dim(Semigroup({2}), {{2, qs(1, {3, 1}, 20)}}), 2);
    CHECK(one.trials == 1);
    CHECK(one.v == SeriesVector{ex(1)});

    // for f = 1 the constant candidates are fixed; a random Laurent vector is cyclic
    SemigroupCocycle s{Semigroup({2, 3}), 2, {}};
    s.values.emplace(2, lift(cm({{1, 0}, {0, 1}})));
    s.values.emplace(3, lift(cm({{1, 0}, {0, 1}})));
    const auto found = cyclic_vector(s, 2, 3);
    CHECK(found.trials == 3);
    CHECK_THROWS_AS(cyclic_vector(s, 2, 2), CyclicSearchFailed);
}

TEST_CASE("rescale_companion examples")
{
    const CompanionData cd{{ex(1, -1)}, 2};
    const auto r = rescale_companion(cd, 2);
    CHECK(r.h[0] == ex(1));

    // h already integral with a unit: alpha <= 0 and the formula still applies
    const CompanionData unit{{qs(0, {2, 1}, 10), qs(1, {1}, 10)}, 2};
    const auto u = rescale_companion(unit, 3);
    long lowest = 1000;
    for (const auto &h : u.h) {
        if (!h.is_zero()) {
            lowest = std::min(lowest, h.valuation());
        }
    }
    CHECK(lowest == 0);

    CHECK_THROWS_AS(rescale_companion({{ex(1), ex(1)}, 2}, 2), DivisibilityViolated);
}

TEST_CASE("rescaled companion has an integral column with a unit")
{
    const Semigroup s({2, 3});
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = random_constant_representation(s, 2, Q, seed);
        const auto c = twist(induce_constant(r, 64), random_gauge(2, Q, seed + 50, 3));
        const auto cv = cyclic_vector(c, 2);
        const auto rc = rescale_companion(cv.companion, 3);
        long lowest = 1000;
        for (const auto &h : rc.h) {
            if (!h.is_zero()) {
                lowest = std::min(lowest, h.valuation());
            }
        }
        CHECK(lowest == 0);
    }
}

TEST_CASE("diag_to_constant recovers a twisted upper triangular representation")
{
    const Semigroup s({2, 3});
    // M_3 = M_2^2 commutes with M_2
    const ConstantRepresentation r{s, 2, {{2, cm({{1, 1}, {0, 2}})}, {3, cm({{1, 3}, {0, 4}})}}};
    const GaugeTransform g{sm({{ex(1), ex(1, -1)}, {ex(0), ex(1)}}), sm({{ex(1), ex(-1, -1)}, {ex(0), ex(1)}})};
    const auto c = twist(induce_constant(r, 40), g);
    for (const auto &[p, f] : c.values) {
        CHECK(f(1, 0).is_zero());
        CHECK_FALSE(is_constant(f));
    }
    const auto cert = diag_to_constant(c, 40);
    CHECK(verify_certificate(c, cert).ok);
    CHECK(cert.checked_precision > 0);
    CHECK(char_polys(cert.constant.values) == char_polys(r.values));
    // the gauge has a Laurent polynomial upper-right entry
    CHECK(cert.gauge.g(0, 1).min_exponent() < 0);

    const auto id = diag_to_constant(induce_constant(r), 40);
    CHECK(equals_within_precision(id.gauge.g, series_identity(Q, 2)));
    CHECK(id.constant.values == r.values);

    const auto one = diag_to_constant(one_dim(s, {{2, ex(3)}, {3, ex(5)}}), 40);
    CHECK(one.constant.values.at(2) == cm({{3}}));

    CHECK_THROWS_AS(diag_to_constant(one_dim(Semigroup({2}), {{2, ex(3)}}), 40), MissingCoprimePair);
    const auto lower = twist(induce_constant(r, 40), {sm({{ex(1), ex(0)}, {ex(1, 1), ex(1)}}), std::nullopt});
    CHECK_THROWS_AS(diag_to_constant(lower, 40), PreconditionViolated);
}

TEST_CASE("trivialize round trip")
{
    for (std::size_t n : {1U, 2U, 3U}) {
        const Semigroup s = n <= 2 ? Semigroup({2, 3}) : Semigroup({2, 21});
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const auto r = random_constant_representation(s, n, Q, seed);
            const auto c = twist(induce_constant(r), random_gauge(n, Q, seed + 1000, 3));
            const auto cert = trivialize(c, 64);
            CHECK(verify_certificate(c, cert).ok);
            CHECK(char_polys(cert.constant.values) == char_polys(r.values));
        }
    }
}

TEST_CASE("trivialize examples")
{
    const Semigroup s({2, 3});
    // idempotent on constant input
    const auto r = random_constant_representation(s, 3, Q, 8);
    const auto same = trivialize(induce_constant(r), 64);
    CHECK(same.constant.values == r.values);
    CHECK(same.gauge.g == series_identity(Q, 3));

    // unipotent constants come back unipotent
    const ConstantRepresentation u{s, 2, {{2, cm({{1, 1}, {0, 1}})}, {3, cm({{1, 1}, {0, 1}})}}};
    const auto uc = twist(induce_constant(u, 64), random_gauge(2, Q, 42, 3));
    const auto ucert = trivialize(uc, 64);
    CHECK(ucert.constant.values == u.values);

    // T^2 + 1 has no root over Q but splits over Q(i)
    const ConstantRepresentation rot{s, 2, {{2, cm({{0, -1}, {1, 0}})}, {3, cm({{0, -1}, {1, 0}})}}};
    try {
        trivialize(twist(induce_constant(rot, 64), random_gauge(2, Q, 5, 3)), 64);
        FAIL("expected FieldExtensionRequired");
    } catch (const FieldExtensionRequired &e) {
        CHECK(std::string(e.what()).find("T^2 + 1") != std::string::npos);
    }
    const auto k4 = FieldDescriptor::cyclotomic(4);
    const ConstantRepresentation rot4{s, 2, {{2, cm({{0, -1}, {1, 0}}, k4)}, {3, cm({{0, -1}, {1, 0}}, k4)}}};
    const auto rc = twist(induce_constant(rot4, 64), random_gauge(2, k4, 5, 3));
    const auto rcert = trivialize(rc, 64);
    CHECK(char_polys(rcert.constant.values) == char_polys(rot4.values));

    const ConstantRepresentation single{Semigroup({2}), 2, {{2, cm({{1, 1}, {0, 2}})}}};
    CHECK_THROWS_AS(trivialize(twist(induce_constant(single, 64), random_gauge(2, Q, 5, 3)), 64),
                    PreconditionViolated);
    // N = 3 needs lcm(1, 3, 7) = 21 to divide a generator
    const auto r3 = random_constant_representation(s, 3, Q, 2);
    CHECK_THROWS_AS(trivialize(twist(induce_constant(r3, 64), random_gauge(3, Q, 9, 3)), 64), PreconditionViolated);
}

TEST_CASE("trivialize refuses gauges beyond the working precision")
{
    const Semigroup s({2, 21});
    const ConstantRepresentation r{s, 2, {{2, cm({{1, 0}, {0, 2}})}, {21, cm({{1, 0}, {0, 5}})}}};
    const auto twisted = [&](long e) {
        auto g = series_identity(Q, 2), gi = series_identity(Q, 2);
        g(0, 1) = ex(1, e);
        gi(0, 1) = ex(-1, e);
        return twist(induce_constant(r, 64), {g, gi});
    };
    const auto ok = trivialize(twisted(-1), 64);
    CHECK(char_polys(ok.constant.values) == char_polys(r.values));
    // sigma_21 of t^-3 is t^-63: nothing is left to certify at precision 64
    CHECK_THROWS_AS(trivialize(twisted(-3), 64), NotExtendable);
    CHECK_THROWS_AS(trivialize(twisted(-4), 64), error);
}
