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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>

#include <semilin/io.hpp>

using namespace semilin;

namespace
{

const FieldDescriptor Q = FieldDescriptor::rationals();
constexpr long M = 64;

struct Outcome
{
    bool ok = true;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

long uniform(std::mt19937_64 &rng, long lo, long hi)
{
    return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

ConstantMatrix random_invertible(std::mt19937_64 &rng, std::size_t n)
{
    for (;;) {
        auto a = constant_zero(Q, n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) = Scalar(Q, uniform(rng, -3, 3));
            }
        }
        if (!determinant(a).is_zero()) {
            return a;
        }
    }
}

// f(t) = f0 + (random integer coefficients) t + ... known modulo t^prec.
SeriesMatrix random_integral(std::mt19937_64 &rng, const ConstantMatrix &f0, long prec)
{
    const std::size_t n = f0.rows();
    auto m = series_zero(Q, n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<Scalar> c{f0(i, j)};
            for (long e = 1; e < prec; ++e) {
                c.emplace_back(Q, uniform(rng, -2, 2));
            }
            m(i, j) = LaurentSeries::from_coeffs(Q, 0, std::move(c), prec);
        }
    }
    return m;
}

// --- 1 and 9 ---------------------------------------------------------------

struct CorpusCase
{
    std::size_t dim;
    Semigroup s;
    std::uint64_t seed;
};

std::vector<CorpusCase> corpus()
{
    std::vector<CorpusCase> out;
    for (std::size_t n = 1; n <= 3; ++n) {
        const Semigroup s(n <= 2 ? std::vector<long>{2, 3} : std::vector<long>{2, 21});
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            out.push_back({n, s, seed});
        }
    }
    return out;
}

SemigroupCocycle corpus_cocycle(const CorpusCase &cc, ConstantRepresentation &r)
{
    r = random_constant_representation(cc.s, cc.dim, Q, cc.seed);
    return twist(induce_constant(r, M), random_gauge(cc.dim, Q, cc.seed + 1000, 3));
}

// Certificates of the whole corpus as JSON text, or the first failure.
Outcome run_corpus(std::vector<std::string> *certs)
{
    Outcome o;
    int passed = 0, total = 0;
    for (const auto &cc : corpus()) {
        ++total;
        ConstantRepresentation r;
        const auto c = corpus_cocycle(cc, r);
        std::string tag = "N=" + std::to_string(cc.dim) + " seed=" + std::to_string(cc.seed);
        try {
            const auto cert = trivialize(c, M);
            bool match = verify_certificate(c, cert).ok;
            for (const auto &[p, m] : r.values) {
                match = match && characteristic_polynomial(m) == characteristic_polynomial(cert.constant.values.at(p));
            }
            if (certs) {
                certs->push_back(io::certificate_to_json(cert).dump());
            }
            if (match) {
                ++passed;
            } else if (o.ok) {
                o = {false, tag + ": recovered constants do not match"};
            }
        } catch (const error &e) {
            if (certs) {
                certs->push_back(std::string("error: ") + e.kind());
            }
            if (o.ok) {
                o = {false, tag + ": " + e.kind() + ": " + e.what()};
            }
        }
    }
    if (o.ok) {
        o.detail = std::to_string(passed) + "/" + std::to_string(total) + " cases";
    }
    return o;
}

Outcome criterion1()
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = run_corpus(nullptr);
    const double dt = seconds_since(t0);
    o.detail += ", " + std::to_string(dt) + " s";
    if (dt > 120) {
        o.ok = false;
        o.detail += " (over 2 minutes)";
    }
    return o;
}

Outcome criterion9()
{
    std::vector<std::string> a, b;
    run_corpus(&a);
    run_corpus(&b);
    if (a.size() != b.size()) {
        return {false, "different number of certificates"};
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            return {false, "certificate " + std::to_string(i) + " differs between runs"};
        }
    }
    std::size_t bytes = 0;
    for (const auto &s : a) {
        bytes += s.size();
    }
    return {true, std::to_string(a.size()) + " certificates byte-identical (" + std::to_string(bytes) + " bytes)"};
}

// --- 2 -----------------------------------------------------------------------

Outcome criterion2()
{
    std::mt19937_64 rng(2002);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<std::size_t>(1 + trial % 4);
        const long p = 2 + trial % 3;
        const auto f0 = random_invertible(rng, n);
        const auto f = random_integral(rng, f0, M);
        const auto phi = integ_limit(f, p, M).g;
        const auto rhs_inv = mat_invert(substitute_power(phi, p), M);
        const auto lhs = truncated(phi * f * rhs_inv, M);
        if (min_prec(lhs) < M) {
            return {false, "trial " + std::to_string(trial) + ": product known only to t^" + std::to_string(min_prec(lhs))};
        }
        if (const auto d = first_difference(lhs, lift(f0))) {
            return {false, "trial " + std::to_string(trial) + ": differs from f(0) at t^" + std::to_string(*d)};
        }
    }
    return {true, "50 trials, N <= 4, exact to t^64"};
}

// --- 3 -----------------------------------------------------------------------

Outcome criterion3()
{
    std::mt19937_64 rng(3003);
    long steps = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const auto n = static_cast<std::size_t>(2 + trial % 3);
        const std::size_t rank = 1 + static_cast<std::size_t>(trial) % (n - 1);
        auto d = constant_zero(Q, n, n);
        for (std::size_t i = 0; i < rank; ++i) {
            d(i, i) = Scalar(Q, static_cast<long>(i) + 1);
        }
        const auto pm = random_invertible(rng, n);
        const auto f = random_integral(rng, pm * d * invert(pm), 32);
        const std::string tag = "trial " + std::to_string(trial);
        if (!series_det_valuation(f)) {
            return {false, tag + ": sample is not invertible"};
        }
        const long ell = 2 + trial % 2;
        const auto bf = block_triangularize(f, ell, 32);
        for (const auto &s : bf.steps) {
            ++steps;
            if (s.first_difference && *s.first_difference < s.modulus) {
                return {false, tag + ": C_" + std::to_string(s.j) + " and C_" + std::to_string(s.j - 1)
                                   + " differ at t^" + std::to_string(*s.first_difference) + " below t^"
                                   + std::to_string(s.modulus)};
            }
        }
        if (bf.split_dim != rank) {
            return {false, tag + ": invertible block has size " + std::to_string(bf.split_dim) + ", expected "
                               + std::to_string(rank)};
        }
        if (determinant(bf.e0).is_zero()) {
            return {false, tag + ": E0 is singular"};
        }
        const auto h0 = constant_part(bf.h_block);
        if (h0.rows() > 0 && matrix_power(h0, h0.rows()) != constant_zero(Q, h0.rows(), h0.rows())) {
            return {false, tag + ": H(0) is not nilpotent"};
        }
        const auto lhs = mat_invert(bf.g.g, 64) * f * substitute_power(bf.g.g, ell);
        if (min_prec(lhs) <= 0 || !equals_within_precision(lhs, bf.assembled())) {
            return {false, tag + ": gauged value is not the assembled block form"};
        }
    }
    return {true, "25 samples, " + std::to_string(steps) + " iterations all congruent"};
}

// --- 4 -----------------------------------------------------------------------

SemigroupCocycle one_dim(long p, const LaurentSeries &x)
{
    SemigroupCocycle c{Semigroup({p}), 1, {}};
    auto m = series_zero(Q, 1, 1);
    m(0, 0) = x;
    c.values.emplace(p, m);
    return c;
}

Outcome criterion4()
{
    const auto t = LaurentSeries::exact(Scalar(Q, 1L), 1);
    const auto c3 = one_dim(3, t), c2 = one_dim(2, t);
    const auto r3 = classify_degree_one(c3, 40), r2 = classify_degree_one(c2, 40);
    if (r3.cls.slope != rational(1, 2)) {
        return {false, "p = 3: slope " + r3.cls.slope.get_str()};
    }
    if (r2.cls.slope != 0) {
        return {false, "p = 2: slope " + r2.cls.slope.get_str()};
    }
    auto tinv = series_zero(Q, 1, 1);
    tinv(0, 0) = LaurentSeries::exact(Scalar(Q, 1L), -1);
    if (!equals_within_precision(r2.gauge.g, tinv)) {
        return {false, "p = 2: gauge is not t^-1"};
    }
    std::mt19937_64 rng(4004);
    for (const auto &[c, ref] : {std::pair{c3, r3}, std::pair{c2, r2}}) {
        const long p = c.semigroup.generators().front();
        for (int k = 0; k < 20; ++k) {
            std::vector<Scalar> co{Scalar(Q, uniform(rng, 1, 5))};
            for (int e = 1; e < 6; ++e) {
                co.emplace_back(Q, uniform(rng, -2, 2));
            }
            const GaugeTransform g{
                [&] {
                    auto m = series_zero(Q, 1, 1);
                    m(0, 0) = LaurentSeries::from_coeffs(Q, uniform(rng, -3, 3), co, exact_precision);
                    return m;
                }(),
                std::nullopt};
            const auto r = classify_degree_one(twist(c, g), 40);
            if (r.cls.slope != ref.cls.slope) {
                return {false, "p = " + std::to_string(p) + ", twist " + std::to_string(k) + ": slope "
                                   + r.cls.slope.get_str()};
            }
        }
    }
    return {true, "<3>: slope 1/2; <2>: slope 0 with gauge t^-1; 40 twists invariant"};
}

// --- 5 -----------------------------------------------------------------------

Outcome criterion5()
{
    std::mt19937_64 rng(5005);
    for (std::size_t n = 1; n <= 3; ++n) {
        std::vector<TransformPair> pairs;
        for (int i = 0; i < 20; ++i) {
            auto a = random_transform(Q, n, rng, 3);
            pairs.emplace_back(std::move(a), random_transform(Q, n, rng, 3));
        }
        const auto rep = verify_chain_rule(pairs, {n, static_cast<long>(n + 1), {}});
        if (!rep.ok) {
            return {false, "n = " + std::to_string(n) + ": " + *rep.items.front().witness};
        }
    }
    for (int tries = 0; tries < 50; ++tries) {
        auto a = random_transform(Q, 2, rng, 3);
        const auto rep = verify_chain_rule(std::vector<TransformPair>{{a, random_transform(Q, 2, rng, 3)}}, {2, 1, {}});
        if (!rep.ok) {
            return {true, "n = 1..3 x 20 pairs ok; m = 1, n = 2 fails after " + std::to_string(tries + 1)
                              + " pair(s): " + rep.items.front().witness->substr(0, 60) + "..."};
        }
    }
    return {false, "no failing pair found for m = 1, n = 2"};
}

// --- 6 -----------------------------------------------------------------------

Outcome criterion6()
{
    std::size_t items = 0;
    for (std::size_t n = 1; n <= 2; ++n) {
        const auto rep = omega_class_check(Q, n);
        items += rep.items.size();
        for (const auto &it : rep.items) {
            if (!it.ok) {
                return {false, "n = " + std::to_string(n) + ", " + it.name + ": " + it.witness.value_or("")};
            }
        }
    }
    // the x -> 1/x example: -x^-2 against x^-2, factor det = -1
    auto sw = constant_zero(Q, 2, 2);
    sw(0, 1) = sw(1, 0) = Scalar(Q, 1L);
    const ProjectiveTransform a(sw);
    const auto j = jacobian_cocycle_value(a);
    const auto ratio = j / a.column_form(1).pow(-2);
    if (j != parse_rational_function("-x1^-2", Q, 1) || ratio != RationalFunction::constant(Q, 1, -1L)) {
        return {false, "x -> 1/x: jacobian " + j.to_string() + ", ratio " + ratio.to_string()};
    }
    return {true, std::to_string(items) + " checks for n = 1, 2: every sample transform matches up to det A"};
}

// --- 7 -----------------------------------------------------------------------

Outcome criterion7()
{
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t n = 2; n <= 3; ++n) {
        const auto rep = cremona_identities(Q, n);
        for (const auto &it : rep.items) {
            if (!it.ok) {
                return {false, "n = " + std::to_string(n) + ", " + it.name + ": " + it.witness.value_or("")};
            }
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 10) {
        return {false, "took " + std::to_string(dt) + " s"};
    }
    return {true, "four identities for n = 2, 3 in " + std::to_string(dt) + " s"};
}

// --- 8 -----------------------------------------------------------------------

RfMatrix rfm(const std::vector<std::vector<std::string>> &rows)
{
    RfMatrix m;
    for (const auto &r : rows) {
        std::vector<RationalFunction> row;
        for (const auto &e : r) {
            row.push_back(parse_rational_function(e, Q, 1));
        }
        m.push_back(std::move(row));
    }
    return m;
}

RfMatrix conjugate(const RfMatrix &h, const ConstantMatrix &c)
{
    const auto ci = invert(c);
    const auto lift_c = [](const ConstantMatrix &m) {
        RfMatrix r;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            std::vector<RationalFunction> row;
            for (std::size_t j = 0; j < m.cols(); ++j) {
                row.push_back(RationalFunction::constant(Q, 1, m(i, j)));
            }
            r.push_back(std::move(row));
        }
        return r;
    };
    return detail::rf_mul(detail::rf_mul(lift_c(ci), h), lift_c(c));
}

Outcome criterion8()
{
    std::mt19937_64 rng(8008);
    const std::vector<RfMatrix> cochars{rfm({{"x1", "0"}, {"0", "x1^-2"}}),
                                        rfm({{"x1^3", "0", "0"}, {"0", "1", "0"}, {"0", "0", "x1^-1"}})};
    int checked = 0;
    for (const auto &h : cochars) {
        for (int k = 0; k < 4; ++k) {
            const auto hh = k == 0 ? h : conjugate(h, random_invertible(rng, h.size()));
            const auto rep = h_functional_equation_check(hh);
            ++checked;
            if (!rep.items.at(2).ok) {
                return {false, "multiplicativity fails for a cocharacter: " + rep.items.at(2).witness.value_or("")};
            }
        }
    }
    const auto bad = h_functional_equation_check(rfm({{"1", "x1 - 1"}, {"0", "1"}}));
    const auto &inv = bad.items.at(1);
    if (inv.ok || !inv.witness || inv.witness->rfind("at x = ", 0) != 0) {
        return {false, "counterexample did not produce a point witness for the inversion identity"};
    }
    return {true, std::to_string(checked) + " cocharacters/conjugates pass; [[1, t-1], [0, 1]] fails inversion " + *inv.witness};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 round-trip trivialization", criterion1},
        {"2 integ limit identity", criterion2},
        {"3 block-triangular contraction", criterion3},
        {"4 degree-one classification", criterion4},
        {"5 PGL chain rule", criterion5},
        {"6 omega class", criterion6},
        {"7 Cremona identities", criterion7},
        {"8 h-equation checker", criterion8},
        {"9 determinism", criterion9},
    };
    int failures = 0;
    for (const auto &[name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.ok ? 0 : 1;
        std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << name << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
