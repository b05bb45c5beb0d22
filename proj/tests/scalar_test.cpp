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

#include <semilin/scalar.hpp>

#include "test_util.hpp"

using namespace semilin;
using semilin_test::q;

TEST_CASE("scalar rational arithmetic")
{
    const auto Q = FieldDescriptor::rationals();
    REQUIRE(Scalar(Q, q(1, 2)) + Scalar(Q, q(1, 3)) == Scalar(Q, q(5, 6)));
    REQUIRE(Scalar(Q, 3L) / Scalar(Q, 4L) == Scalar(Q, q(3, 4)));
    REQUIRE_THROWS_AS(Scalar(Q, 1L) / Scalar(Q), DivisionByZero);
}

TEST_CASE("scalar cyclotomic reduction")
{
    const auto K4 = FieldDescriptor::cyclotomic(4);
    const auto i = Scalar::zeta(K4);
    REQUIRE(i * i == Scalar(K4, -1L));

    // (1 + z)(1 + z^2) in Q(zeta_3): 1 + z + z^2 + z^3 = 0 + 1.
    const auto K3 = FieldDescriptor::cyclotomic(3);
    const auto z = Scalar::zeta(K3);
    const Scalar one(K3, 1L);
    REQUIRE((one + z) * (one + z * z) == one);

    REQUIRE(FieldDescriptor::cyclotomic(12).degree() == 4);
    REQUIRE(FieldDescriptor::cyclotomic(1) == FieldDescriptor::rationals());
    REQUIRE_THROWS_AS(Scalar(K3, 1L) + Scalar(K4, 1L), FieldMismatch);
}

TEST_CASE("scalar field axioms on random samples")
{
    std::mt19937_64 rng(7);
    for (unsigned n : {1u, 3u, 4u, 5u, 12u}) {
        const auto f = FieldDescriptor::cyclotomic(n);
        for (int trial = 0; trial < 40; ++trial) {
            const auto a = semilin_test::random_scalar(rng, f);
            const auto b = semilin_test::random_scalar(rng, f);
            const auto c = semilin_test::random_scalar(rng, f);
            REQUIRE((a * b) * c == a * (b * c));
            REQUIRE((a + b) * c == a * c + b * c);
            REQUIRE(a * b == b * a);
            if (!a.is_zero()) {
                REQUIRE((a * a.inverse()).is_one());
                REQUIRE((b / a) * a == b);
            }
        }
    }
}

TEST_CASE("root_of_unity")
{
    const auto K12 = FieldDescriptor::cyclotomic(12);
    REQUIRE(root_of_unity(K12, 4) == Scalar::zeta(K12).pow(3));
    REQUIRE(root_of_unity(FieldDescriptor::rationals(), 2) == Scalar(FieldDescriptor::rationals(), -1L));
    REQUIRE_THROWS_AS(root_of_unity(FieldDescriptor::rationals(), 3), OrderNotAvailable);
    // Q(zeta_3) also contains -zeta_3 of order 6.
    REQUIRE_NOTHROW(root_of_unity(FieldDescriptor::cyclotomic(3), 6));
    REQUIRE_THROWS_AS(root_of_unity(FieldDescriptor::cyclotomic(3), 4), OrderNotAvailable);

    for (unsigned n : {4u, 5u, 8u, 12u}) {
        const auto f = FieldDescriptor::cyclotomic(n);
        for (unsigned d = 1; d <= f.roots_of_unity_order(); ++d) {
            if (f.roots_of_unity_order() % d != 0) {
                continue;
            }
            const auto w = root_of_unity(f, d);
            REQUIRE(w.pow(d).is_one());
            for (unsigned e = 1; e < d; ++e) {
                if (d % e == 0) {
                    REQUIRE_FALSE(w.pow(e).is_one());
                }
            }
        }
    }
}

TEST_CASE("poly_roots_in_field")
{
    const auto Q = FieldDescriptor::rationals();
    auto r = poly_roots_in_field({Scalar(Q, -1L), Scalar(Q), Scalar(Q, 1L)});
    REQUIRE(r.size() == 2);
    REQUIRE(r[0].first == Scalar(Q, -1L));
    REQUIRE(r[1].first == Scalar(Q, 1L));
    REQUIRE(r[0].second == 1);

    REQUIRE(poly_roots_in_field({Scalar(Q, 1L), Scalar(Q), Scalar(Q, 1L)}).empty());

    const auto K4 = FieldDescriptor::cyclotomic(4);
    const auto i = Scalar::zeta(K4);
    auto ri = poly_roots_in_field({Scalar(K4, 1L), Scalar(K4), Scalar(K4, 1L)});
    REQUIRE(ri.size() == 2);
    REQUIRE(ri[0].first == i);
    REQUIRE(ri[1].first == -i);

    // (T - 2)^2 (T + 1/3) T
    std::vector<Scalar> p{Scalar(Q), Scalar(Q, q(4, 3)), Scalar(Q, q(8, 3)), Scalar(Q, q(-11, 3)), Scalar(Q, 1L)};
    auto rp = poly_roots_in_field(p);
    REQUIRE(rp.size() == 3);
    REQUIRE(rp[0] == std::make_pair(Scalar(Q, q(-1, 3)), 1u));
    REQUIRE(rp[1] == std::make_pair(Scalar(Q), 1u));
    REQUIRE(rp[2] == std::make_pair(Scalar(Q, 2L), 2u));
}

TEST_CASE("poly_roots_in_field property: roots annihilate, multiplicities bounded")
{
    std::mt19937_64 rng(11);
    for (unsigned n : {1u, 3u, 4u, 8u}) {
        const auto f = FieldDescriptor::cyclotomic(n);
        const unsigned order = f.roots_of_unity_order();
        for (int trial = 0; trial < 15; ++trial) {
            // Product of (T - c_i * w^j_i) with small rationals c_i, times a unit.
            std::vector<Scalar> poly{Scalar(f, static_cast<long>(rng() % 3) + 1)};
            const int deg = 1 + static_cast<int>(rng() % 3);
            for (int k = 0; k < deg; ++k) {
                Scalar root = Scalar(f, q(static_cast<long>(rng() % 7) - 3, static_cast<long>(rng() % 2) + 1))
                              * root_of_unity(f, order).pow(static_cast<long>(rng() % order));
                std::vector<Scalar> next(poly.size() + 1, Scalar(f));
                for (std::size_t i = 0; i < poly.size(); ++i) {
                    next[i + 1] += poly[i];
                    next[i] -= poly[i] * root;
                }
                poly = std::move(next);
            }
            unsigned total = 0;
            for (const auto &[root, mult] : poly_roots_in_field(poly)) {
                REQUIRE(poly_eval(poly, root).is_zero());
                total += mult;
            }
            REQUIRE(total == static_cast<unsigned>(deg));
        }
    }
}
