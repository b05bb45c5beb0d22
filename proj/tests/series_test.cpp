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

#include <semilin/series.hpp>

#include "test_util.hpp"

using namespace semilin;
using semilin_test::qs;

namespace
{

// Schoolbook product, independent of the integer-lifted convolution.
LaurentSeries naive_mul(const LaurentSeries &a, const LaurentSeries &b)
{
    const long prec = std::min(a.prec() + b.min_exponent(), b.prec() + a.min_exponent());
    const long start = a.min_exponent() + b.min_exponent();
    if (a.is_zero() || b.is_zero() || prec <= start) {
        return LaurentSeries::zero(a.field(), prec);
    }
    std::vector<Scalar> c(static_cast<std::size_t>(prec - start), Scalar(a.field()));
    for (long i = a.min_exponent(); i < a.prec(); ++i) {
        for (long j = b.min_exponent(); j < b.prec(); ++j) {
            if (i + j < prec) {
                c[static_cast<std::size_t>(i + j - start)] += a.coeff(i) * b.coeff(j);
            }
        }
    }
    return LaurentSeries::from_coeffs(a.field(), start, std::move(c), prec);
}

} // namespace

TEST_CASE("series arithmetic examples")
{
    auto p = qs(0, {1, 1}, 8) * qs(0, {1, -1}, 8);
    REQUIRE(p == qs(0, {1, 0, -1}, 8));

    auto m = qs(-1, {1, 1}, 4) * qs(1, {1}, 4);
    REQUIRE(m.prec() == 3);
    REQUIRE(m == qs(0, {1, 1}, 3));

    auto z = qs(0, {1, 1}, 5) + qs(0, {-1, -1}, 5);
    REQUIRE(z.is_zero());
    REQUIRE(z.prec() == 5);
    REQUIRE_THROWS_AS(z.valuation(), IndistinguishableFromZero);
}

TEST_CASE("series_invert examples")
{
    REQUIRE(qs(0, {1, -1}, 5).inverse() == qs(0, {1, 1, 1, 1, 1}, 5));
    auto inv = qs(2, {1}, 6).inverse();
    REQUIRE(inv == qs(-2, {1}, 2));
    REQUIRE_THROWS_AS(LaurentSeries::zero(FieldDescriptor::rationals(), 5).inverse(), IndistinguishableFromZero);
}

TEST_CASE("substitute_power examples")
{
    REQUIRE(qs(1, {1, 1}, 10).substitute_power(3) == qs(3, {1, 0, 0, 1}, 30));
    REQUIRE(qs(0, {5}, 7).substitute_power(4) == qs(0, {5}, 28));
    auto s = qs(-1, {1, 1}, 3).substitute_power(2);
    REQUIRE(s.prec() == 6);
    REQUIRE(s == qs(-2, {1, 0, 1}, 6));
}

TEST_CASE("valuation_of examples")
{
    REQUIRE(qs(2, {3, 0, 0, 1}, 10).valuation() == 2);
    REQUIRE(qs(-4, {1, 0, 0, 0, -1}, 10).valuation() == -4);
}

TEST_CASE("pretty printing")
{
    REQUIRE(qs(-1, {1, 2, 0, 3}, 5).to_string() == "t^-1 + 2 + 3*t^2 + O(t^5)");
    REQUIRE(qs(0, {-1, 0, -2}, 4).to_string() == "-1 - 2*t^2 + O(t^4)");
    REQUIRE(LaurentSeries::zero(FieldDescriptor::rationals(), 3).to_string() == "O(t^3)");
}

TEST_CASE("series ring axioms within precision")
{
    std::mt19937_64 rng(3);
    for (auto f : {FieldDescriptor::rationals(), FieldDescriptor::cyclotomic(4)}) {
        for (int trial = 0; trial < 30; ++trial) {
            const long rel = 1 + static_cast<long>(rng() % 32);
            auto a = semilin_test::random_series(rng, f, -2, rel);
            auto b = semilin_test::random_series(rng, f, -1, 1 + static_cast<long>(rng() % 32));
            auto c = semilin_test::random_series(rng, f, 0, 1 + static_cast<long>(rng() % 32));
            REQUIRE((a * b) == naive_mul(a, b));
            REQUIRE(((a * b) * c).equals_within_precision(a * (b * c)));
            REQUIRE(((a + b) * c).equals_within_precision(a * c + b * c));
            REQUIRE((a * b).equals_within_precision(b * a));
            REQUIRE(((a + b) - b).equals_within_precision(a));
        }
    }
}

TEST_CASE("series inverse property")
{
    std::mt19937_64 rng(5);
    for (auto f : {FieldDescriptor::rationals(), FieldDescriptor::cyclotomic(4), FieldDescriptor::cyclotomic(5)}) {
        for (int trial = 0; trial < 30; ++trial) {
            auto a = semilin_test::random_series(rng, f, -3, 1 + static_cast<long>(rng() % 32), true);
            auto inv = a.inverse();
            REQUIRE(inv.valuation() == -a.valuation());
            REQUIRE(inv.rel_prec() == a.rel_prec());
            auto prod = a * inv;
            REQUIRE(prod.equals_within_precision(LaurentSeries::one(f, prod.prec())));
            REQUIRE(prod.prec() == a.rel_prec());
        }
    }
}

TEST_CASE("substitute_power composes")
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = semilin_test::random_series(rng, FieldDescriptor::rationals(), -2, 10);
        const long p = 1 + static_cast<long>(rng() % 4), q = 1 + static_cast<long>(rng() % 4);
        REQUIRE(a.substitute_power(p).substitute_power(q) == a.substitute_power(p * q));
    }
}

TEST_CASE("precision propagation is monotone")
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = semilin_test::random_series(rng, FieldDescriptor::rationals(), -2, 24, true);
        auto b = semilin_test::random_series(rng, FieldDescriptor::rationals(), -1, 24, true);
        const long cut = 8 + static_cast<long>(rng() % 8);
        auto lo = (a.truncated(cut) * b.truncated(cut)).inverse() + a.truncated(cut).substitute_power(2);
        auto hi = (a * b).inverse() + a.substitute_power(2);
        REQUIRE(lo.prec() <= hi.prec());
        REQUIRE(hi.truncated(lo.prec()) == lo);
    }
}

TEST_CASE("exact series")
{
    const auto Q = FieldDescriptor::rationals();
    auto x = qs(0, {1, -1}, exact_precision);
    REQUIRE(x.is_exact());
    REQUIRE(x.to_string() == "1 - t");
    REQUIRE((x * x).is_exact());
    REQUIRE((x * x) == qs(0, {1, -2, 1}, exact_precision));
    REQUIRE(x.substitute_power(5).is_exact());
    auto inv = x.inverse(6);
    REQUIRE(inv == qs(0, {1, 1, 1, 1, 1, 1}, 6));
    REQUIRE(LaurentSeries::exact(Scalar(Q, 2L), 3).inverse() == LaurentSeries::exact(Scalar(Q, semilin_test::q(1, 2)), -3));
    // Exact times finite keeps the finite precision.
    REQUIRE((x * qs(0, {1}, 10)).prec() == 10);
}
