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

#ifndef SEMILIN_MATRIX_HPP
#define SEMILIN_MATRIX_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <semilin/error.hpp>
#include <semilin/scalar.hpp>
#include <semilin/series.hpp>

namespace semilin
{

/// Dense row-major matrix. The zero element is stored so that empty blocks and
/// products with an empty inner dimension stay well defined.
template <typename T>
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T zero)
        : rows_(rows), cols_(cols), zero_(std::move(zero)), data_(rows * cols, zero_)
    {
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t dim() const noexcept { return rows_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    const T &zero() const noexcept { return zero_; }

    T &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
    {
        Matrix b(nr, nc, zero_);
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t j = 0; j < nc; ++j) {
                b(i, j) = (*this)(r0 + i, c0 + j);
            }
        }
        return b;
    }

    void set_block(std::size_t r0, std::size_t c0, const Matrix &b)
    {
        for (std::size_t i = 0; i < b.rows(); ++i) {
            for (std::size_t j = 0; j < b.cols(); ++j) {
                (*this)(r0 + i, c0 + j) = b(i, j);
            }
        }
    }

    std::vector<T> column(std::size_t j) const
    {
        std::vector<T> c;
        c.reserve(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            c.push_back((*this)(i, j));
        }
        return c;
    }

    void set_column(std::size_t j, const std::vector<T> &c)
    {
        for (std::size_t i = 0; i < rows_; ++i) {
            (*this)(i, j) = c[i];
        }
    }

    void swap_rows(std::size_t a, std::size_t b)
    {
        for (std::size_t j = 0; j < cols_; ++j) {
            std::swap((*this)(a, j), (*this)(b, j));
        }
    }

    template <typename F>
    auto map(F &&f) const
    {
        using U = std::decay_t<decltype(f(zero_))>;
        Matrix<U> r(rows_, cols_, f(zero_));
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                r(i, j) = f((*this)(i, j));
            }
        }
        return r;
    }

    friend bool operator==(const Matrix &a, const Matrix &b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }
    friend bool operator!=(const Matrix &a, const Matrix &b) { return !(a == b); }

    friend Matrix operator+(const Matrix &a, const Matrix &b) { return combine(a, b, false); }
    friend Matrix operator-(const Matrix &a, const Matrix &b) { return combine(a, b, true); }

    friend Matrix operator*(const Matrix &a, const Matrix &b)
    {
        if (a.cols_ != b.rows_) {
            throw DimMismatch("matrix product " + a.shape() + " * " + b.shape());
        }
        Matrix r(a.rows_, b.cols_, a.zero_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t j = 0; j < b.cols_; ++j) {
                if (a.cols_ == 0) {
                    continue;
                }
                T acc = a(i, 0) * b(0, j);
                for (std::size_t k = 1; k < a.cols_; ++k) {
                    acc = acc + a(i, k) * b(k, j);
                }
                r(i, j) = std::move(acc);
            }
        }
        return r;
    }

    Matrix operator-() const
    {
        return map([](const T &x) { return -x; });
    }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    static Matrix combine(const Matrix &a, const Matrix &b, bool subtract)
    {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
            throw DimMismatch("matrix sum " + a.shape() + " vs " + b.shape());
        }
        Matrix r(a.rows_, a.cols_, a.zero_);
        for (std::size_t k = 0; k < a.data_.size(); ++k) {
            r.data_[k] = subtract ? a.data_[k] - b.data_[k] : a.data_[k] + b.data_[k];
        }
        return r;
    }

    std::size_t rows_ = 0, cols_ = 0;
    T zero_{};
    std::vector<T> data_;
};

/// Square matrix over the constant field k.
using ConstantMatrix = Matrix<Scalar>;
/// Square matrix over k((t)); the value of a cocycle at a semigroup element.
using SeriesMatrix = Matrix<LaurentSeries>;
using SeriesVector = std::vector<LaurentSeries>;

inline ConstantMatrix constant_zero(const FieldDescriptor &f, std::size_t rows, std::size_t cols)
{
    return ConstantMatrix(rows, cols, Scalar(f));
}

inline ConstantMatrix constant_identity(const FieldDescriptor &f, std::size_t n)
{
    auto m = constant_zero(f, n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = Scalar(f, 1L);
    }
    return m;
}

inline SeriesMatrix series_zero(const FieldDescriptor &f, std::size_t rows, std::size_t cols)
{
    return SeriesMatrix(rows, cols, LaurentSeries::zero(f, exact_precision));
}

inline SeriesMatrix series_identity(const FieldDescriptor &f, std::size_t n)
{
    auto m = series_zero(f, n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = LaurentSeries::exact(Scalar(f, 1L));
    }
    return m;
}

inline FieldDescriptor field_of(const ConstantMatrix &m) { return m.zero().field(); }
inline FieldDescriptor field_of(const SeriesMatrix &m) { return m.zero().field(); }

/// Exact embedding of constants into k((t)).
inline SeriesMatrix lift(const ConstantMatrix &c)
{
    return c.map([](const Scalar &x) { return LaurentSeries::exact(x); });
}

/// Entry-wise t -> t^p.
inline SeriesMatrix substitute_power(const SeriesMatrix &m, long p)
{
    return m.map([p](const LaurentSeries &x) { return x.substitute_power(p); });
}

inline SeriesMatrix truncated(const SeriesMatrix &m, long prec)
{
    return m.map([prec](const LaurentSeries &x) { return x.truncated(prec); });
}

inline SeriesMatrix scaled(const SeriesMatrix &m, const LaurentSeries &s)
{
    return m.map([&s](const LaurentSeries &x) { return x * s; });
}

inline SeriesVector mat_vec(const SeriesMatrix &m, const SeriesVector &v)
{
    if (m.cols() != v.size()) {
        throw DimMismatch("matrix-vector product " + m.shape() + " * " + std::to_string(v.size()));
    }
    SeriesVector r;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        LaurentSeries acc = m.zero();
        for (std::size_t k = 0; k < m.cols(); ++k) {
            acc = acc + m(i, k) * v[k];
        }
        r.push_back(std::move(acc));
    }
    return r;
}

/// Smallest absolute precision among the entries.
inline long min_prec(const SeriesMatrix &m)
{
    long p = exact_precision;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            p = std::min(p, m(i, j).prec());
        }
    }
    return p;
}

/// Smallest valuation among nonzero entries (exact_precision if all vanish).
inline long min_valuation(const SeriesMatrix &m)
{
    long v = exact_precision;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            v = std::min(v, m(i, j).min_exponent());
        }
    }
    return v;
}

/// Lowest exponent at which a and b provably differ, if any.
inline std::optional<long> first_difference(const SeriesMatrix &a, const SeriesMatrix &b)
{
    const auto d = a - b;
    std::optional<long> first;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) {
            if (!d(i, j).is_zero() && (!first || d(i, j).min_exponent() < *first)) {
                first = d(i, j).min_exponent();
            }
        }
    }
    return first;
}

inline bool equals_within_precision(const SeriesMatrix &a, const SeriesMatrix &b)
{
    return !first_difference(a, b).has_value();
}

inline bool is_constant(const SeriesMatrix &m)
{
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (!m(i, j).is_constant()) {
                return false;
            }
        }
    }
    return true;
}

/// Coefficient of t^0 of every entry.
inline ConstantMatrix constant_part(const SeriesMatrix &m)
{
    const FieldDescriptor f = field_of(m);
    return m.map([&f](const LaurentSeries &x) { return x.prec() > 0 ? x.constant_term() : Scalar(f); });
}

/// Inverse over k((t)) by Gauss-Jordan elimination, pivoting on the entry of
/// minimal valuation. Exact entries are expanded to exact_rel_prec terms.
inline SeriesMatrix mat_invert(const SeriesMatrix &a, long exact_rel_prec = default_precision)
{
    if (!a.is_square()) {
        throw DimMismatch("mat_invert on a non-square " + a.shape() + " matrix");
    }
    const std::size_t n = a.rows();
    SeriesMatrix m = a;
    SeriesMatrix inv = series_identity(field_of(a), n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = n;
        for (std::size_t r = col; r < n; ++r) {
            if (!m(r, col).is_zero() && (best == n || m(r, col).valuation() < m(best, col).valuation())) {
                best = r;
            }
        }
        if (best == n) {
            throw SingularWithinPrecision("matrix is singular within precision (column " + std::to_string(col) + ")");
        }
        m.swap_rows(col, best);
        inv.swap_rows(col, best);
        const LaurentSeries pinv = m(col, col).inverse(exact_rel_prec);
        for (std::size_t j = 0; j < n; ++j) {
            if (j >= col) {
                m(col, j) = m(col, j) * pinv;
            }
            inv(col, j) = inv(col, j) * pinv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || m(r, col).is_zero()) {
                continue;
            }
            const LaurentSeries factor = m(r, col);
            for (std::size_t j = 0; j < n; ++j) {
                if (j >= col) {
                    m(r, j) = m(r, j) - factor * m(col, j);
                }
                if (!inv(col, j).is_zero()) {
                    inv(r, j) = inv(r, j) - factor * inv(col, j);
                }
            }
        }
    }
    return inv;
}

/// Block diagonal matrix diag(a, b).
template <typename T>
Matrix<T> block_diagonal(const Matrix<T> &a, const Matrix<T> &b)
{
    Matrix<T> r(a.rows() + b.rows(), a.cols() + b.cols(), a.zero());
    r.set_block(0, 0, a);
    r.set_block(a.rows(), a.cols(), b);
    return r;
}

inline SeriesMatrix series_from_columns(const FieldDescriptor &f, std::size_t n, const std::vector<SeriesVector> &cols)
{
    auto m = series_zero(f, n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        m.set_column(j, cols[j]);
    }
    return m;
}

/// Rank over k((t)) by elimination with minimal-valuation pivots; entries that
/// are zero within precision count as zero.
inline std::size_t series_rank(SeriesMatrix m)
{
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
        std::size_t best = m.rows();
        for (std::size_t r = rank; r < m.rows(); ++r) {
            if (!m(r, col).is_zero() && (best == m.rows() || m(r, col).valuation() < m(best, col).valuation())) {
                best = r;
            }
        }
        if (best == m.rows()) {
            continue;
        }
        m.swap_rows(rank, best);
        const LaurentSeries pinv = m(rank, col).inverse();
        for (std::size_t r = rank + 1; r < m.rows(); ++r) {
            if (m(r, col).is_zero()) {
                continue;
            }
            const LaurentSeries factor = m(r, col) * pinv;
            for (std::size_t j = col; j < m.cols(); ++j) {
                m(r, j) = m(r, j) - factor * m(rank, j);
            }
        }
        ++rank;
    }
    return rank;
}

/// t-adic valuation of det(m); nullopt when m is singular within precision.
inline std::optional<long> series_det_valuation(SeriesMatrix m)
{
    if (!m.is_square()) {
        throw DimMismatch("determinant of a non-square " + m.shape() + " matrix");
    }
    const std::size_t n = m.rows();
    long v = 0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = n;
        for (std::size_t r = col; r < n; ++r) {
            if (!m(r, col).is_zero() && (best == n || m(r, col).valuation() < m(best, col).valuation())) {
                best = r;
            }
        }
        if (best == n) {
            return std::nullopt;
        }
        m.swap_rows(col, best);
        v += m(col, col).valuation();
        const LaurentSeries pinv = m(col, col).inverse();
        for (std::size_t r = col + 1; r < n; ++r) {
            if (m(r, col).is_zero()) {
                continue;
            }
            const LaurentSeries factor = m(r, col) * pinv;
            for (std::size_t j = col; j < n; ++j) {
                m(r, j) = m(r, j) - factor * m(col, j);
            }
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Exact linear algebra over the constant field.

struct RowEchelon
{
    ConstantMatrix reduced;
    std::vector<std::size_t> pivots;
};

/// Reduced row echelon form.
inline RowEchelon rref(ConstantMatrix m)
{
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t p = row;
        while (p < m.rows() && m(p, col).is_zero()) {
            ++p;
        }
        if (p == m.rows()) {
            continue;
        }
        m.swap_rows(row, p);
        const Scalar inv = m(row, col).inverse();
        for (std::size_t j = col; j < m.cols(); ++j) {
            m(row, j) *= inv;
        }
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (r == row || m(r, col).is_zero()) {
                continue;
            }
            const Scalar factor = m(r, col);
            for (std::size_t j = col; j < m.cols(); ++j) {
                m(r, j) -= factor * m(row, j);
            }
        }
        pivots.push_back(col);
        ++row;
    }
    return {std::move(m), std::move(pivots)};
}

inline std::size_t rank(const ConstantMatrix &m) { return rref(m).pivots.size(); }

/// Basis of the null space; each vector has its first nonzero entry equal to 1.
inline std::vector<std::vector<Scalar>> kernel_basis(const ConstantMatrix &m)
{
    const auto [r, pivots] = rref(m);
    const FieldDescriptor f = field_of(m);
    std::vector<std::vector<Scalar>> basis;
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : pivots) {
        is_pivot[p] = true;
    }
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) {
            continue;
        }
        std::vector<Scalar> v(m.cols(), Scalar(f));
        v[free] = Scalar(f, 1L);
        for (std::size_t i = 0; i < pivots.size(); ++i) {
            v[pivots[i]] = -r(i, free);
        }
        const auto lead = std::find_if(v.begin(), v.end(), [](const Scalar &x) { return !x.is_zero(); });
        const Scalar inv = lead->inverse();
        for (auto &x : v) {
            x *= inv;
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Basis of the column space, taken from the original pivot columns.
inline std::vector<std::vector<Scalar>> image_basis(const ConstantMatrix &m)
{
    std::vector<std::vector<Scalar>> basis;
    for (auto p : rref(m).pivots) {
        basis.push_back(m.column(p));
    }
    return basis;
}

inline ConstantMatrix from_columns(const FieldDescriptor &f, std::size_t n, const std::vector<std::vector<Scalar>> &cols)
{
    auto m = constant_zero(f, n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        m.set_column(j, cols[j]);
    }
    return m;
}

/// Extends linearly independent columns by standard basis vectors to an
/// invertible square matrix.
inline ConstantMatrix complete_basis(const FieldDescriptor &f, std::size_t n, std::vector<std::vector<Scalar>> cols)
{
    for (std::size_t e = 0; e < n && cols.size() < n; ++e) {
        std::vector<Scalar> unit(n, Scalar(f));
        unit[e] = Scalar(f, 1L);
        cols.push_back(unit);
        if (rank(from_columns(f, n, cols)) < cols.size()) {
            cols.pop_back();
        }
    }
    return from_columns(f, n, cols);
}

inline ConstantMatrix invert(const ConstantMatrix &a)
{
    if (!a.is_square()) {
        throw DimMismatch("invert on a non-square " + a.shape() + " matrix");
    }
    const std::size_t n = a.rows();
    const FieldDescriptor f = field_of(a);
    auto aug = constant_zero(f, n, 2 * n);
    aug.set_block(0, 0, a);
    aug.set_block(0, n, constant_identity(f, n));
    auto [r, pivots] = rref(aug);
    if (pivots.size() < n || pivots[n - 1] != n - 1) {
        throw SingularWithinPrecision("constant matrix is singular");
    }
    return r.block(0, n, n, n);
}

inline Scalar determinant(ConstantMatrix m)
{
    const FieldDescriptor f = field_of(m);
    Scalar det(f, 1L);
    const std::size_t n = m.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = col;
        while (p < n && m(p, col).is_zero()) {
            ++p;
        }
        if (p == n) {
            return Scalar(f);
        }
        if (p != col) {
            m.swap_rows(p, col);
            det = -det;
        }
        det *= m(col, col);
        const Scalar inv = m(col, col).inverse();
        for (std::size_t r = col + 1; r < n; ++r) {
            if (m(r, col).is_zero()) {
                continue;
            }
            const Scalar factor = m(r, col) * inv;
            for (std::size_t j = col; j < n; ++j) {
                m(r, j) -= factor * m(col, j);
            }
        }
    }
    return det;
}

inline ConstantMatrix matrix_power(const ConstantMatrix &c, std::size_t e)
{
    ConstantMatrix r = constant_identity(field_of(c), c.rows());
    for (std::size_t i = 0; i < e; ++i) {
        r = r * c;
    }
    return r;
}

/// det(T*I - c) by Faddeev-LeVerrier, low degree first (monic).
inline std::vector<Scalar> characteristic_polynomial(const ConstantMatrix &c)
{
    const std::size_t n = c.rows();
    const FieldDescriptor f = field_of(c);
    std::vector<Scalar> coeffs(n + 1, Scalar(f));
    coeffs[n] = Scalar(f, 1L);
    ConstantMatrix mk = constant_zero(f, n, n);
    const ConstantMatrix id = constant_identity(f, n);
    for (std::size_t k = 1; k <= n; ++k) {
        mk = c * mk;
        for (std::size_t i = 0; i < n; ++i) {
            mk(i, i) += coeffs[n - k + 1];
        }
        const ConstantMatrix amk = c * mk;
        Scalar trace(f);
        for (std::size_t i = 0; i < n; ++i) {
            trace += amk(i, i);
        }
        coeffs[n - k] = -trace / Scalar(f, static_cast<long>(k));
    }
    return coeffs;
}

struct StableDecomposition
{
    /// Columns: a basis of Im c^N followed by a basis of ker c^N.
    ConstantMatrix basis_change;
    /// rank of c^N, the size of the invertible block.
    std::size_t rank_stable;
};

/// Fitting decomposition of a constant matrix: basis_change^-1 * c * basis_change
/// is block diagonal with an invertible block followed by a nilpotent one.
inline StableDecomposition stable_decomposition(const ConstantMatrix &c)
{
    const std::size_t n = c.rows();
    const FieldDescriptor f = field_of(c);
    const ConstantMatrix p = matrix_power(c, n);
    auto cols = image_basis(p);
    const std::size_t r = cols.size();
    for (auto &v : kernel_basis(p)) {
        cols.push_back(std::move(v));
    }
    return {from_columns(f, n, cols), r};
}

struct Eigenpair
{
    Scalar value;
    std::vector<Scalar> vector;
};

/// An eigenpair with eigenvalue in the field, choosing the first root in
/// root_order_less order; empty when the characteristic polynomial has no root
/// that the field search can find.
inline std::optional<Eigenpair> eigenvector_in_field(const ConstantMatrix &c)
{
    if (c.rows() == 0) {
        return std::nullopt;
    }
    const auto roots = poly_roots_in_field(characteristic_polynomial(c));
    if (roots.empty()) {
        return std::nullopt;
    }
    const Scalar &lambda = roots.front().first;
    ConstantMatrix shifted = c;
    for (std::size_t i = 0; i < c.rows(); ++i) {
        shifted(i, i) -= lambda;
    }
    return Eigenpair{lambda, kernel_basis(shifted).front()};
}

inline std::string poly_to_string(const std::vector<Scalar> &p, const std::string &var = "T")
{
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = p.size(); i-- > 0;) {
        if (p[i].is_zero()) {
            continue;
        }
        if (!first) {
            os << " + ";
        }
        first = false;
        const bool unit = p[i].is_one() && i > 0;
        if (!unit) {
            os << (p[i].is_rational() ? p[i].to_string() : "(" + p[i].to_string() + ")");
        }
        if (i > 0) {
            os << (unit ? "" : "*") << var;
            if (i > 1) {
                os << "^" << i;
            }
        }
    }
    return first ? std::string("0") : os.str();
}

} // namespace semilin

#endif
