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

#ifndef SEMILIN_IO_HPP
#define SEMILIN_IO_HPP

// JSON encoding of the library types. Integers that can grow (numerators,
// denominators) are decimal strings; exponents and dimensions are numbers.

#include <string>
#include <vector>

#include <json.hpp>

#include <semilin/cocycle.hpp>
#include <semilin/localsolve.hpp>
#include <semilin/pgl.hpp>

namespace semilin::io
{

using json = nlohmann::json;

namespace detail
{

[[noreturn]] inline void bad(const std::string &what) { throw ParseError("malformed JSON: " + what); }

inline const json &member(const json &j, const char *key)
{
    if (!j.is_object() || !j.contains(key)) {
        bad(std::string("missing key '") + key + "'");
    }
    return j.at(key);
}

inline long as_long(const json &j, const char *what)
{
    if (j.is_number_integer()) {
        return j.get<long>();
    }
    if (j.is_string()) {
        try {
            std::size_t pos = 0;
            const long v = std::stol(j.get<std::string>(), &pos);
            if (pos == j.get<std::string>().size()) {
                return v;
            }
        } catch (const std::exception &) {
        }
    }
    bad(std::string(what) + " must be an integer");
}

inline const json &as_array(const json &j, const char *what)
{
    if (!j.is_array()) {
        bad(std::string(what) + " must be an array");
    }
    return j;
}

} // namespace detail

// --- rationals and scalars ---------------------------------------------------

inline json rational_to_json(const rational &r)
{
    return json::array({r.get_num().get_str(), r.get_den().get_str()});
}

/// ["num", "den"], "num/den", "num" or an integer.
inline rational rational_from_json(const json &j)
{
    try {
        if (j.is_number_integer()) {
            return rational(j.get<long>());
        }
        if (j.is_string()) {
            rational r(j.get<std::string>());
            if (sgn(r.get_den()) == 0) {
                detail::bad("zero denominator");
            }
            r.canonicalize();
            return r;
        }
        if (j.is_array() && j.size() == 2 && j[0].is_string() && j[1].is_string()) {
            rational r(integer(j[0].get<std::string>()), integer(j[1].get<std::string>()));
            if (sgn(r.get_den()) == 0) {
                detail::bad("zero denominator");
            }
            r.canonicalize();
            return r;
        }
    } catch (const std::invalid_argument &) {
        detail::bad("invalid rational " + j.dump());
    }
    detail::bad("invalid rational " + j.dump());
}

inline json field_to_json(const FieldDescriptor &f)
{
    return {{"kind", f.kind() == FieldDescriptor::kind_t::rationals ? "rationals" : "cyclotomic"},
            {"conductor", f.conductor()}};
}

inline FieldDescriptor field_from_json(const json &j)
{
    const auto &kind = detail::member(j, "kind");
    if (kind == "rationals") {
        return FieldDescriptor::rationals();
    }
    if (kind == "cyclotomic") {
        const long n = detail::as_long(detail::member(j, "conductor"), "conductor");
        if (n < 1 || n > 100000) {
            detail::bad("conductor out of range");
        }
        return FieldDescriptor::cyclotomic(static_cast<unsigned>(n));
    }
    detail::bad("unknown field kind " + kind.dump());
}

inline json scalar_to_json(const Scalar &s)
{
    json c = json::array();
    for (const auto &r : s.coeffs()) {
        c.push_back(rational_to_json(r));
    }
    return {{"field", field_to_json(s.field())}, {"coeffs", c}};
}

/// A full scalar object, or a bare rational when the field is known.
inline Scalar scalar_from_json(const json &j, const std::optional<FieldDescriptor> &expected = std::nullopt)
{
    if (!j.is_object()) {
        if (!expected) {
            detail::bad("scalar without a field");
        }
        return Scalar(*expected, rational_from_json(j));
    }
    const FieldDescriptor f = field_from_json(detail::member(j, "field"));
    if (expected && f != *expected) {
        throw FieldMismatch("scalar over " + f.name() + " where " + expected->name() + " was expected");
    }
    std::vector<rational> poly;
    for (const auto &c : detail::as_array(detail::member(j, "coeffs"), "coeffs")) {
        poly.push_back(rational_from_json(c));
    }
    if (poly.size() > f.degree()) {
        detail::bad("scalar has more coefficients than the field degree");
    }
    poly.resize(f.degree());
    return Scalar(f, std::move(poly));
}

// --- series and matrices -----------------------------------------------------

inline json series_to_json(const LaurentSeries &s)
{
    json c = json::array();
    for (const auto &x : s.coeffs()) {
        c.push_back(scalar_to_json(x));
    }
    json prec = s.is_exact() ? json("exact") : json(s.prec());
    return {{"valuation", s.min_exponent()}, {"prec", prec}, {"coeffs", c}};
}

inline LaurentSeries series_from_json(const json &j, const FieldDescriptor &f)
{
    const long v = detail::as_long(detail::member(j, "valuation"), "valuation");
    const auto &pj = detail::member(j, "prec");
    const long prec = pj == "exact" ? exact_precision : detail::as_long(pj, "prec");
    std::vector<Scalar> coeffs;
    for (const auto &c : detail::as_array(detail::member(j, "coeffs"), "coeffs")) {
        coeffs.push_back(scalar_from_json(c, f));
    }
    if (v + static_cast<long>(coeffs.size()) > prec) {
        detail::bad("series coefficients extend beyond its precision");
    }
    return LaurentSeries::from_coeffs(f, v, std::move(coeffs), prec);
}

template <typename T, typename Enc>
json matrix_to_json(const Matrix<T> &m, Enc enc)
{
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row.push_back(enc(m(i, j)));
        }
        rows.push_back(row);
    }
    return {{"dim", m.rows()}, {"entries", rows}};
}

inline json series_matrix_to_json(const SeriesMatrix &m) { return matrix_to_json(m, series_to_json); }
inline json constant_matrix_to_json(const ConstantMatrix &m) { return matrix_to_json(m, scalar_to_json); }

template <typename T, typename Dec>
Matrix<T> matrix_from_json(const json &j, T zero, Dec dec)
{
    const json &rows = detail::as_array(j.is_object() ? detail::member(j, "entries") : j, "entries");
    const std::size_t n = rows.size();
    if (j.is_object() && detail::as_long(detail::member(j, "dim"), "dim") != static_cast<long>(n)) {
        detail::bad("dim does not match the number of rows");
    }
    Matrix<T> m(n, n, zero);
    for (std::size_t i = 0; i < n; ++i) {
        const auto &row = detail::as_array(rows[i], "matrix row");
        if (row.size() != n) {
            throw DimMismatch("matrix row " + std::to_string(i) + " has " + std::to_string(row.size())
                              + " entries, expected " + std::to_string(n));
        }
        for (std::size_t k = 0; k < n; ++k) {
            m(i, k) = dec(row[k]);
        }
    }
    return m;
}

inline SeriesMatrix series_matrix_from_json(const json &j, const FieldDescriptor &f)
{
    return matrix_from_json(j, LaurentSeries::zero(f, exact_precision),
                            [&f](const json &e) { return series_from_json(e, f); });
}

/// Entries may be full scalars or bare rationals.
inline ConstantMatrix constant_matrix_from_json(const json &j, const FieldDescriptor &f)
{
    return matrix_from_json(j, Scalar(f), [&f](const json &e) { return scalar_from_json(e, f); });
}

// --- cocycles, representations, certificates ---------------------------------

inline FieldDescriptor infer_field(const json &values);

// An explicit "field" key wins, then any scalar object in values, then the fallback.
inline FieldDescriptor field_for(const json &j, const json &values, const std::optional<FieldDescriptor> &fallback)
{
    if (j.contains("field")) {
        return field_from_json(j.at("field"));
    }
    try {
        return infer_field(values);
    } catch (const ParseError &) {
        if (fallback) {
            return *fallback;
        }
        throw;
    }
}

inline FieldDescriptor infer_field(const json &values)
{
    // first scalar object found anywhere fixes the field
    if (values.is_object() && values.contains("field") && values.contains("coeffs")) {
        return field_from_json(values.at("field"));
    }
    if (values.is_object() || values.is_array()) {
        for (const auto &v : values) {
            try {
                return infer_field(v);
            } catch (const ParseError &) {
            }
        }
    }
    throw ParseError("malformed JSON: no field found");
}

inline Semigroup semigroup_from_json(const json &j)
{
    std::vector<long> gens;
    for (const auto &g : detail::as_array(j, "semigroup")) {
        gens.push_back(detail::as_long(g, "generator"));
    }
    return Semigroup(gens);
}

inline json semigroup_to_json(const Semigroup &s) { return s.generators(); }

inline json cocycle_to_json(const SemigroupCocycle &c)
{
    json v = json::object();
    for (const auto &[p, m] : c.values) {
        v[std::to_string(p)] = series_matrix_to_json(m);
    }
    return {{"semigroup", semigroup_to_json(c.semigroup)}, {"dim", c.dim}, {"values", v}};
}

/// Entries may be bare rationals over the fallback field.
inline SemigroupCocycle cocycle_from_json(const json &j, const std::optional<FieldDescriptor> &fallback = std::nullopt)
{
    SemigroupCocycle c{semigroup_from_json(detail::member(j, "semigroup")),
                       static_cast<std::size_t>(detail::as_long(detail::member(j, "dim"), "dim")),
                       {}};
    const auto &vals = detail::member(j, "values");
    const FieldDescriptor f = field_for(j, vals, fallback);
    for (long p : c.semigroup.generators()) {
        const auto key = std::to_string(p);
        if (!vals.contains(key)) {
            detail::bad("no value for generator " + key);
        }
        auto m = series_matrix_from_json(vals.at(key), f);
        if (m.rows() != c.dim) {
            throw DimMismatch("value at " + key + " has dimension " + std::to_string(m.rows()) + ", expected "
                              + std::to_string(c.dim));
        }
        c.values.emplace(p, std::move(m));
    }
    if (vals.size() != c.values.size()) {
        detail::bad("values has entries for non-generators");
    }
    return c;
}

inline json constant_values_to_json(const std::map<long, ConstantMatrix> &values)
{
    json v = json::object();
    for (const auto &[p, m] : values) {
        v[std::to_string(p)] = constant_matrix_to_json(m);
    }
    return v;
}

inline json representation_to_json(const ConstantRepresentation &r)
{
    return {{"semigroup", semigroup_to_json(r.semigroup)}, {"dim", r.dim}, {"values", constant_values_to_json(r.values)}};
}

inline ConstantRepresentation representation_from_json(const json &j,
                                                       const std::optional<FieldDescriptor> &field = std::nullopt)
{
    ConstantRepresentation r{semigroup_from_json(detail::member(j, "semigroup")),
                             static_cast<std::size_t>(detail::as_long(detail::member(j, "dim"), "dim")),
                             {}};
    const auto &vals = detail::member(j, "values");
    const FieldDescriptor f = field_for(j, vals, field);
    for (const auto &[key, m] : vals.items()) {
        r.values.emplace(detail::as_long(json(key), "generator"), constant_matrix_from_json(m, f));
    }
    r.validate();
    return r;
}

inline json certificate_to_json(const TrivializationCertificate &c)
{
    return {{"gauge", series_matrix_to_json(c.gauge.g)},
            {"constant", constant_values_to_json(c.constant.values)},
            {"checkedPrecision", c.checked_precision}};
}

/// The semigroup and field come from the cocycle the certificate is for.
inline TrivializationCertificate certificate_from_json(const json &j, const SemigroupCocycle &c)
{
    const FieldDescriptor f = c.field();
    TrivializationCertificate cert;
    cert.gauge.g = series_matrix_from_json(detail::member(j, "gauge"), f);
    cert.constant.semigroup = c.semigroup;
    cert.constant.dim = c.dim;
    for (const auto &[key, m] : detail::member(j, "constant").items()) {
        cert.constant.values.emplace(detail::as_long(json(key), "generator"), constant_matrix_from_json(m, f));
    }
    cert.checked_precision = detail::as_long(detail::member(j, "checkedPrecision"), "checkedPrecision");
    return cert;
}

// --- reports -------------------------------------------------------------------

inline json cocycle_report_to_json(const CocycleReport &r)
{
    json pairs = json::array();
    for (const auto &p : r.pairs) {
        pairs.push_back({{"p", p.p},
                         {"q", p.q},
                         {"firstViolation", p.first_violation ? json(*p.first_violation) : json(nullptr)},
                         {"precision", p.precision}});
    }
    return {{"check", "cocycle"}, {"ok", r.ok}, {"pairs", pairs}};
}

inline json certificate_report_to_json(const CertificateReport &r)
{
    json mism = json::object(), prec = json::object();
    for (const auto &[p, d] : r.first_mismatch) {
        mism[std::to_string(p)] = d ? json(*d) : json(nullptr);
    }
    for (const auto &[p, m] : r.precision) {
        prec[std::to_string(p)] = m;
    }
    json j{{"check", "certificate"}, {"ok", r.ok}, {"firstMismatch", mism}, {"precision", prec}};
    if (!r.message.empty()) {
        j["witness"] = r.message;
    }
    return j;
}

inline json check_report_to_json(const CheckReport &r)
{
    json items = json::array();
    const CheckItem *first_failure = nullptr;
    for (const auto &it : r.items) {
        json i{{"name", it.name}, {"ok", it.ok}};
        if (it.witness) {
            i["witness"] = *it.witness;
        }
        items.push_back(i);
        if (!it.ok && !first_failure) {
            first_failure = &it;
        }
    }
    json j{{"check", r.check}, {"ok", r.ok}, {"items", items}};
    if (first_failure) {
        j["witness"] = first_failure->name + (first_failure->witness ? ": " + *first_failure->witness : "");
    }
    return j;
}

// --- PGL inputs ----------------------------------------------------------------

/// A square matrix of rationals ("p/q" strings, ["p","q"] pairs or integers).
inline ProjectiveTransform transform_from_json(const json &j, const FieldDescriptor &f)
{
    return ProjectiveTransform(constant_matrix_from_json(j, f));
}

inline json transform_to_json(const ProjectiveTransform &a) { return constant_matrix_to_json(a.matrix()); }

/// A square matrix of strings in the rational-function syntax, in x1.
inline RfMatrix rf_matrix_from_json(const json &j, const FieldDescriptor &f)
{
    RfMatrix m;
    for (const auto &row : detail::as_array(j.is_object() ? detail::member(j, "entries") : j, "h")) {
        std::vector<RationalFunction> r;
        for (const auto &e : detail::as_array(row, "h row")) {
            if (!e.is_string()) {
                detail::bad("h entries must be strings");
            }
            r.push_back(parse_rational_function(e.get<std::string>(), f, 1));
        }
        m.push_back(std::move(r));
    }
    return m;
}

} // namespace semilin::io

#endif
