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

#ifndef SEMILIN_PGL_HPP
#define SEMILIN_PGL_HPP

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <semilin/error.hpp>
#include <semilin/matrix.hpp>
#include <semilin/ratfunc.hpp>
#include <semilin/scalar.hpp>

namespace semilin
{

// ---------------------------------------------------------------------------
// Projective transforms.

/// Invertible (n+1)x(n+1) matrix modulo scalars, scaled so that its first
/// nonzero entry in row-major order is 1. It acts on k(x1..xn) by
/// x_j -> (x~ A)_j / (x~ A)_{n+1} with x~ = (x1, .., xn, 1), so that
/// (AB).f = A.(B.f).
class ProjectiveTransform
{
public:
    ProjectiveTransform() = default;
    explicit ProjectiveTransform(ConstantMatrix m) : mat_(std::move(m))
    {
        if (!mat_.is_square() || mat_.rows() < 2) {
            throw DimMismatch("projective transform needs a square matrix of size at least 2, got " + mat_.shape());
        }
        if (determinant(mat_).is_zero()) {
            throw SingularWithinPrecision("projective transform matrix is singular");
        }
        for (std::size_t i = 0; i < mat_.rows(); ++i) {
            for (std::size_t j = 0; j < mat_.cols(); ++j) {
                if (!mat_(i, j).is_zero()) {
                    const Scalar inv = mat_(i, j).inverse();
                    mat_ = mat_.map([&inv](const Scalar &x) { return x * inv; });
                    return;
                }
            }
        }
    }

    static ProjectiveTransform identity(const FieldDescriptor &f, std::size_t n)
    {
        return ProjectiveTransform(constant_identity(f, n + 1));
    }

    const ConstantMatrix &matrix() const noexcept { return mat_; }
    std::size_t n() const noexcept { return mat_.rows() - 1; }
    const FieldDescriptor &field() const { return mat_(0, 0).field(); }
    Scalar det() const { return determinant(mat_); }

    /// (x~ A)_j for column j: A_{1j} x1 + .. + A_{nj} xn + A_{n+1,j}.
    RationalFunction column_form(std::size_t j) const
    {
        const std::size_t nn = n();
        MultiPoly p = MultiPoly::constant(field(), nn, mat_(nn, j));
        for (std::size_t i = 0; i < nn; ++i) {
            p += MultiPoly::variable(field(), nn, i).scaled(mat_(i, j));
        }
        return p;
    }

    /// Images of x1..xn.
    std::vector<RationalFunction> images() const
    {
        const RationalFunction den = column_form(n());
        std::vector<RationalFunction> r;
        for (std::size_t j = 0; j < n(); ++j) {
            r.push_back(column_form(j) / den);
        }
        return r;
    }

    friend ProjectiveTransform operator*(const ProjectiveTransform &a, const ProjectiveTransform &b)
    {
        return ProjectiveTransform(a.mat_ * b.mat_);
    }
    ProjectiveTransform inverse() const { return ProjectiveTransform(semilin::invert(mat_)); }

    friend bool operator==(const ProjectiveTransform &a, const ProjectiveTransform &b) { return a.mat_ == b.mat_; }

    std::string to_string() const
    {
        std::string s = "[";
        for (std::size_t i = 0; i < mat_.rows(); ++i) {
            s += i ? ", [" : "[";
            for (std::size_t j = 0; j < mat_.cols(); ++j) {
                s += (j ? ", " : "") + mat_(i, j).to_string();
            }
            s += "]";
        }
        return s + "]";
    }

private:
    ConstantMatrix mat_;
};

/// A.f
inline RationalFunction transform_action(const ProjectiveTransform &a, const RationalFunction &f)
{
    return substitute(f, a.images());
}

/// Random transform with integer entries in [-range, range].
inline ProjectiveTransform random_transform(const FieldDescriptor &f, std::size_t n, std::mt19937_64 &rng,
                                            long range = 3)
{
    for (;;) {
        auto m = constant_zero(f, n + 1, n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j <= n; ++j) {
                m(i, j) = Scalar(f, static_cast<long>(rng() % static_cast<std::uint64_t>(2 * range + 1)) - range);
            }
        }
        if (!determinant(m).is_zero()) {
            return ProjectiveTransform(m);
        }
    }
}

// ---------------------------------------------------------------------------
// Degree-one cocycles A -> phi(det A) (x~ A)_{n+1}^{-m}.

/// phi(lambda) = psi(lambda) lambda^{m/(n+1)} when (n+1) | m, and psi(lambda)
/// otherwise. psi is a character of k^x / (k^x)^{n+1}, given by its values on
/// the determinants that occur; an empty sample is the trivial psi.
struct PGLDegreeOneClass
{
    std::size_t n = 1;
    long m = 0;
    std::vector<std::pair<Scalar, Scalar>> character;

    bool homogeneous() const { return m % static_cast<long>(n + 1) == 0; }

    Scalar phi(const Scalar &lambda) const
    {
        Scalar v(lambda.field(), 1L);
        if (!character.empty()) {
            bool found = false;
            for (const auto &[at, val] : character) {
                if (at == lambda) {
                    v = val;
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw PreconditionViolated("character is not sampled at " + lambda.to_string());
            }
        }
        if (homogeneous()) {
            v *= lambda.pow(m / static_cast<long>(n + 1));
        }
        return v;
    }
};

inline RationalFunction degree_one_cocycle_value(const ProjectiveTransform &a, const PGLDegreeOneClass &cls)
{
    if (a.n() != cls.n) {
        throw DimMismatch("transform acts on " + std::to_string(a.n()) + " variables, class is for "
                          + std::to_string(cls.n));
    }
    const RationalFunction ell = a.column_form(a.n());
    return RationalFunction::constant(a.field(), a.n(), cls.phi(a.det())) * ell.pow(-cls.m);
}

struct CheckItem
{
    std::string name;
    bool ok = true;
    std::optional<std::string> witness;
};

struct CheckReport
{
    std::string check;
    bool ok = true;
    std::vector<CheckItem> items;

    void add(CheckItem item)
    {
        ok = ok && item.ok;
        items.push_back(std::move(item));
    }
};

using TransformPair = std::pair<ProjectiveTransform, ProjectiveTransform>;

/// f_{AB} = f_A . A(f_B) for each pair (A, B), with any cocycle A -> f_A.
template <typename Value>
CheckReport verify_chain_rule_with(const std::vector<TransformPair> &pairs, Value value, std::string check)
{
    CheckReport rep{std::move(check), true, {}};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto &[a, b] = pairs[i];
        const RationalFunction lhs = value(a * b);
        const RationalFunction rhs = value(a) * transform_action(a, value(b));
        CheckItem it{"pair " + std::to_string(i), lhs == rhs, std::nullopt};
        if (!it.ok) {
            it.witness = "A = " + a.to_string() + ", B = " + b.to_string() + ": f_AB = " + lhs.to_string()
                         + " but f_A A(f_B) = " + rhs.to_string();
        }
        rep.add(std::move(it));
    }
    return rep;
}

/// Every ordered pair of the list.
inline std::vector<TransformPair> all_pairs(const std::vector<ProjectiveTransform> &as)
{
    std::vector<TransformPair> r;
    for (const auto &a : as) {
        for (const auto &b : as) {
            r.emplace_back(a, b);
        }
    }
    return r;
}

inline CheckReport verify_chain_rule(const std::vector<TransformPair> &pairs, const PGLDegreeOneClass &cls)
{
    return verify_chain_rule_with(
        pairs, [&cls](const ProjectiveTransform &a) { return degree_one_cocycle_value(a, cls); }, "chain-rule");
}

inline CheckReport verify_chain_rule(const std::vector<ProjectiveTransform> &as, const PGLDegreeOneClass &cls)
{
    return verify_chain_rule(all_pairs(as), cls);
}

/// sigma -> sigma(omega)/omega for omega = dx1 ^ .. ^ dxn.
inline RationalFunction jacobian_cocycle_value(const ProjectiveTransform &a) { return jacobian_det(a.images()); }

/// Generating sample of PGL_{n+1}: for each coordinate a translation, a
/// scaling by 2 and the swap with the hyperplane at infinity; for each pair of
/// coordinates a swap and a shear; and the involution
/// x -> (x1, .., xn) / (x1 - 1).
inline std::vector<std::pair<std::string, ProjectiveTransform>> pgl_generator_sample(const FieldDescriptor &f,
                                                                                    std::size_t n)
{
    std::vector<std::pair<std::string, ProjectiveTransform>> out;
    const auto id = [&] { return constant_identity(f, n + 1); };
    for (std::size_t i = 0; i < n; ++i) {
        const std::string x = "x" + std::to_string(i + 1);
        auto t = id();
        t(n, i) = Scalar(f, 1L);
        out.emplace_back("translate " + x, ProjectiveTransform(t));
        auto d = id();
        d(i, i) = Scalar(f, 2L);
        out.emplace_back("scale " + x, ProjectiveTransform(d));
        auto s = id();
        s.swap_rows(i, n);
        out.emplace_back("swap " + x + " with infinity", ProjectiveTransform(s));
        for (std::size_t j = i + 1; j < n; ++j) {
            auto p = id();
            p.swap_rows(i, j);
            out.emplace_back("swap " + x + ", x" + std::to_string(j + 1), ProjectiveTransform(p));
            auto sh = id();
            sh(j, i) = Scalar(f, 1L);
            out.emplace_back("shear " + x + " by x" + std::to_string(j + 1), ProjectiveTransform(sh));
        }
    }
    auto g = id();
    g(0, n) = Scalar(f, 1L);
    g(n, n) = Scalar(f, -1L);
    out.emplace_back("g0", ProjectiveTransform(g));
    return out;
}

/// On each sample transform the Jacobian cocycle equals the bare formula
/// l_A^{-(n+1)} times the constant det(A), which is phi(det A) for the class
/// m = n+1 with trivial psi; the Jacobian values also satisfy the chain rule.
inline CheckReport omega_class_check(const FieldDescriptor &f, std::size_t n)
{
    if (n < 1) {
        throw PreconditionViolated("omega_class_check needs n >= 1");
    }
    CheckReport rep{"omega-class", true, {}};
    const PGLDegreeOneClass cls{n, static_cast<long>(n + 1), {}};
    std::vector<ProjectiveTransform> sample;
    for (const auto &[name, a] : pgl_generator_sample(f, n)) {
        sample.push_back(a);
        const RationalFunction j = jacobian_cocycle_value(a);
        const RationalFunction formula = a.column_form(n).pow(-static_cast<long>(n + 1));
        const RationalFunction ratio = j / formula;
        CheckItem it{name, ratio.is_constant() && ratio == RationalFunction::constant(f, n, a.det()), std::nullopt};
        it.ok = it.ok && j == degree_one_cocycle_value(a, cls);
        if (!it.ok) {
            it.witness = "jacobian " + j.to_string() + ", formula " + formula.to_string() + ", ratio "
                         + ratio.to_string() + ", det " + a.det().to_string();
        } else {
            it.witness = "factor " + ratio.to_string();
        }
        rep.add(std::move(it));
    }
    const auto chain = verify_chain_rule_with(all_pairs(sample), jacobian_cocycle_value, "jacobian chain rule");
    rep.add({"jacobian chain rule on the sample", chain.ok,
             chain.ok ? std::nullopt : std::optional<std::string>(chain.items.front().witness)});
    return rep;
}

// ---------------------------------------------------------------------------
// Cremona maps.

/// Element of Aut(L/k) given by the images of x1..xn. Products follow the
/// action on functions: (a * b).f = a.(b.f).
struct BirationalMap
{
    std::vector<RationalFunction> images;

    friend BirationalMap operator*(const BirationalMap &a, const BirationalMap &b)
    {
        return {compose_maps(b.images, a.images)};
    }
    friend bool operator==(const BirationalMap &a, const BirationalMap &b) { return a.images == b.images; }

    std::string to_string() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < images.size(); ++i) {
            s += (i ? ", " : "") + images[i].to_string();
        }
        return s + ")";
    }
};

struct CremonaGenerators
{
    BirationalMap sigma, xi, s0, s1, g0, iota01;
    /// iota_{1j} for j = 1..n (iota_{11} is the identity).
    std::vector<BirationalMap> iota1;
};

inline CremonaGenerators cremona_generators(const FieldDescriptor &f, std::size_t n)
{
    if (n < 2) {
        throw PreconditionViolated("the Cremona identities need n >= 2");
    }
    const auto x = [&](std::size_t i) { return RationalFunction::variable(f, n, i); };
    const auto one = RationalFunction::constant(f, n, 1L);
    CremonaGenerators g;
    for (std::size_t i = 0; i < n; ++i) {
        g.sigma.images.push_back(i == 0 ? one / x(0) : x(i));
        g.xi.images.push_back(i == 0 ? one / x(0) : i == 1 ? x(1) / x(0) : x(i));
        g.s0.images.push_back(one / x(i));
        g.s1.images.push_back(i == 0 ? one / x(0) : x(i) / (x(0) * x(0)));
        g.g0.images.push_back(x(i) / (x(0) - one));
        g.iota01.images.push_back(i == 0 ? one / x(0) : x(i) / x(0));
    }
    for (std::size_t j = 0; j < n; ++j) {
        BirationalMap m{identity_map(f, n)};
        std::swap(m.images[0], m.images[j]);
        g.iota1.push_back(std::move(m));
    }
    return g;
}

inline CheckReport cremona_identities(const FieldDescriptor &f, std::size_t n)
{
    const auto g = cremona_generators(f, n);
    const BirationalMap id{identity_map(f, n)};
    CheckReport rep{"cremona", true, {}};
    const auto item = [&](std::string name, const BirationalMap &lhs, const BirationalMap &rhs) {
        CheckItem it{std::move(name), lhs == rhs, std::nullopt};
        if (!it.ok) {
            it.witness = lhs.to_string() + " vs " + rhs.to_string();
        }
        rep.add(std::move(it));
    };
    const bool inv_sigma = g.sigma * g.sigma == id, inv_xi = g.xi * g.xi == id;
    CheckItem first{"sigma^2 = id, xi^2 = id", inv_sigma && inv_xi, std::nullopt};
    if (!first.ok) {
        first.witness = inv_sigma ? "xi^2 = " + (g.xi * g.xi).to_string() : "sigma^2 = " + (g.sigma * g.sigma).to_string();
    }
    rep.add(std::move(first));
    item("s1 = iota01 sigma iota01", g.s1, g.iota01 * g.sigma * g.iota01);
    item("s1 = g0 s0 g0 s0 g0", g.s1, g.g0 * g.s0 * g.g0 * g.s0 * g.g0);
    BirationalMap prod = id;
    for (const auto &io : g.iota1) {
        prod = prod * io * g.sigma * io;
    }
    item("s0 = prod_j iota1j sigma iota1j", g.s0, prod);
    return rep;
}

// ---------------------------------------------------------------------------
// Functional equations for matrices of univariate rational functions.

using RfMatrix = std::vector<std::vector<RationalFunction>>;

namespace detail
{

inline RfMatrix rf_mul(const RfMatrix &a, const RfMatrix &b)
{
    const std::size_t n = a.size();
    const auto zero = RationalFunction::constant(a[0][0].field(), a[0][0].nvars(), 0L);
    RfMatrix r(n, std::vector<RationalFunction>(n, zero));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                if (!a[i][k].is_zero() && !b[k][j].is_zero()) {
                    r[i][j] = r[i][j] + a[i][k] * b[k][j];
                }
            }
        }
    }
    return r;
}

inline RfMatrix rf_invert(RfMatrix m)
{
    const std::size_t n = m.size();
    const FieldDescriptor f = m[0][0].field();
    const std::size_t v = m[0][0].nvars();
    RfMatrix inv(n, std::vector<RationalFunction>(n, RationalFunction::constant(f, v, 0L)));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = RationalFunction::constant(f, v, 1L);
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c].is_zero()) {
            ++p;
        }
        if (p == n) {
            throw SingularWithinPrecision("matrix of rational functions is singular");
        }
        std::swap(m[p], m[c]);
        std::swap(inv[p], inv[c]);
        const RationalFunction pinv = m[c][c].inverse();
        for (std::size_t j = 0; j < n; ++j) {
            m[c][j] = m[c][j] * pinv;
            inv[c][j] = inv[c][j] * pinv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || m[r][c].is_zero()) {
                continue;
            }
            const RationalFunction factor = m[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                m[r][j] = m[r][j] - factor * m[c][j];
                inv[r][j] = inv[r][j] - factor * inv[c][j];
            }
        }
    }
    return inv;
}

inline RfMatrix rf_at(const RfMatrix &h, const RationalFunction &arg)
{
    RfMatrix r;
    for (const auto &row : h) {
        std::vector<RationalFunction> out;
        for (const auto &e : row) {
            out.push_back(substitute(e, {arg}));
        }
        r.push_back(std::move(out));
    }
    return r;
}

// First small integer point (x, y) and entry where two matrices of bivariate
// functions take different finite values.
inline std::optional<std::string> point_witness(const RfMatrix &lhs, const RfMatrix &rhs)
{
    const FieldDescriptor f = lhs[0][0].field();
    for (long s = 4; s <= 40; ++s) {
        for (long x = 2; x < s - 1; ++x) {
            const long y = s - x;
            const std::vector<Scalar> pt{Scalar(f, x), Scalar(f, y)};
            for (std::size_t i = 0; i < lhs.size(); ++i) {
                for (std::size_t j = 0; j < lhs.size(); ++j) {
                    const auto a = lhs[i][j].evaluate(pt), b = rhs[i][j].evaluate(pt);
                    if (a && b && *a != *b) {
                        return "at x = " + std::to_string(x) + ", y = " + std::to_string(y) + " entry ("
                               + std::to_string(i) + "," + std::to_string(j) + "): " + a->to_string() + " vs "
                               + b->to_string();
                    }
                }
            }
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Checks h(x)h(y) = h(xy-x+1) h(xy/(xy-x+1)), h(1/x) = h(x)^-1 and
/// h(x)h(y) = h(xy) in k(x, y).
inline CheckReport h_functional_equation_check(const RfMatrix &h)
{
    if (h.empty() || h.size() != h[0].size()) {
        throw DimMismatch("h must be a nonempty square matrix");
    }
    for (const auto &row : h) {
        if (row.size() != h.size()) {
            throw DimMismatch("h must be a square matrix");
        }
        for (const auto &e : row) {
            if (e.nvars() != 1) {
                throw DimMismatch("entries of h must be univariate");
            }
        }
    }
    const FieldDescriptor f = h[0][0].field();
    const auto x = RationalFunction::variable(f, 2, 0), y = RationalFunction::variable(f, 2, 1);
    const auto one = RationalFunction::constant(f, 2, 1L);
    const RfMatrix hx = detail::rf_at(h, x), hy = detail::rf_at(h, y);
    const RfMatrix prod = detail::rf_mul(hx, hy);
    CheckReport rep{"h-equation", true, {}};
    const auto item = [&](std::string name, const RfMatrix &lhs, const RfMatrix &rhs) {
        CheckItem it{std::move(name), lhs == rhs, std::nullopt};
        if (!it.ok) {
            it.witness = detail::point_witness(lhs, rhs);
            if (!it.witness) {
                it.witness = "symbolic mismatch";
            }
        }
        rep.add(std::move(it));
    };
    const RationalFunction u = x * y - x + one;
    item("h(x)h(y) = h(xy-x+1)h(xy/(xy-x+1))", prod, detail::rf_mul(detail::rf_at(h, u), detail::rf_at(h, x * y / u)));
    RfMatrix inv;
    try {
        inv = detail::rf_invert(hx);
    } catch (const SingularWithinPrecision &) {
        rep.add({"h(1/x) = h(x)^-1", false, std::string("h(x) is not invertible")});
        item("h(x)h(y) = h(xy)", prod, detail::rf_at(h, x * y));
        return rep;
    }
    item("h(1/x) = h(x)^-1", detail::rf_at(h, one / x), inv);
    item("h(x)h(y) = h(xy)", prod, detail::rf_at(h, x * y));
    return rep;
}

} // namespace semilin

#endif
