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

// semilin command-line front end. Every command prints one JSON document.
// Exit status: 0 ok, 1 mathematical failure, 2 usage or input error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <semilin/io.hpp>

#ifndef SEMILIN_GENERATOR_HASH
#define SEMILIN_GENERATOR_HASH "unknown"
#endif

namespace
{

using namespace semilin;
using semilin::io::json;

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Options
{
    long precision = default_precision;
    std::string field = "q";
    std::uint64_t seed = 0;
    long trials = 20;
    std::string out;
    std::vector<std::string> inputs;
    // twist / gen-corpus
    int complexity = 3;
    // pgl / cremona
    std::size_t n = 2;
    long m = 3;
    std::size_t pairs = 20;
    bool omega = false;
    // gen-corpus
    std::size_t dim = 2;
    std::vector<long> semigroup{2, 3};
    std::size_t count = 25;
};

json read_json(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw UsageError(path + ": " + e.what());
    }
}

void emit(const json &j, const Options &o)
{
    const std::string text = j.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) {
        throw UsageError("cannot write " + o.out);
    }
    f << text;
}

const std::string &input(const Options &o, std::size_t i, const char *what)
{
    if (o.inputs.size() <= i) {
        throw UsageError(std::string("missing input: ") + what);
    }
    return o.inputs[i];
}

// Accepts a cocycle file or a gen-corpus case file.
SemigroupCocycle load_cocycle(const Options &o)
{
    const json j = read_json(input(o, 0, "cocycle file"));
    return io::cocycle_from_json(j.is_object() && j.contains("cocycle") ? j.at("cocycle") : j,
                                 FieldDescriptor::parse(o.field));
}

int run_verify(const Options &o)
{
    const auto c = load_cocycle(o);
    const auto rep = verify_cocycle(c);
    emit(io::cocycle_report_to_json(rep), o);
    return rep.ok ? 0 : 1;
}

int run_twist(const Options &o)
{
    const auto c = load_cocycle(o);
    GaugeTransform g;
    if (o.inputs.size() > 1) {
        g.g = io::series_matrix_from_json(read_json(o.inputs[1]), c.field());
    } else {
        g = random_gauge(c.dim, c.field(), o.seed, o.complexity);
    }
    auto t = twist(c, g);
    for (auto &[p, f] : t.values) {
        f = truncated(f, o.precision);
    }
    json j = io::cocycle_to_json(t);
    j["gauge"] = io::series_matrix_to_json(g.g);
    emit(j, o);
    return 0;
}

int run_trivialize(const Options &o)
{
    const auto c = load_cocycle(o);
    const auto cert = trivialize(c, o.precision, {o.trials, o.seed});
    emit(io::certificate_to_json(cert), o);
    return 0;
}

int run_verify_cert(const Options &o)
{
    const auto c = load_cocycle(o);
    const auto cert = io::certificate_from_json(read_json(input(o, 1, "certificate file")), c);
    const auto rep = verify_certificate(c, cert);
    emit(io::certificate_report_to_json(rep), o);
    return rep.ok ? 0 : 1;
}

int run_classify(const Options &o)
{
    const auto c = load_cocycle(o);
    const auto r = classify_degree_one(c, o.precision);
    json chr = json::object(), ex = json::object();
    for (const auto &[p, a] : r.cls.character) {
        chr[std::to_string(p)] = io::scalar_to_json(a);
    }
    for (const auto &[p, e] : r.exponents) {
        ex[std::to_string(p)] = e;
    }
    emit({{"check", "classify"},
          {"ok", true},
          {"character", chr},
          {"slope", r.cls.slope.get_str()},
          {"exponents", ex},
          {"gauge", io::series_matrix_to_json(r.gauge.g)}},
         o);
    return 0;
}

int run_pgl_check(const Options &o)
{
    const FieldDescriptor f = FieldDescriptor::parse(o.field);
    if (o.n < 1) {
        throw UsageError("--n must be at least 1");
    }
    if (o.omega) {
        const auto rep = omega_class_check(f, o.n);
        emit(io::check_report_to_json(rep), o);
        return rep.ok ? 0 : 1;
    }
    PGLDegreeOneClass cls{o.n, o.m, {}};
    std::vector<TransformPair> pairs;
    if (!o.inputs.empty()) {
        // {"transforms": [matrix, ...], "character": [[det, value], ...]}
        const json j = read_json(o.inputs[0]);
        std::vector<ProjectiveTransform> as;
        for (const auto &t : io::detail::as_array(io::detail::member(j, "transforms"), "transforms")) {
            as.push_back(io::transform_from_json(t, f));
            if (as.back().n() != o.n) {
                throw UsageError("transform size does not match --n");
            }
        }
        if (j.contains("character")) {
            for (const auto &e : io::detail::as_array(j.at("character"), "character")) {
                if (!e.is_array() || e.size() != 2) {
                    throw ParseError("malformed JSON: character entries are [det, value] pairs");
                }
                cls.character.emplace_back(io::scalar_from_json(e[0], f), io::scalar_from_json(e[1], f));
            }
        }
        pairs = all_pairs(as);
    } else {
        std::mt19937_64 rng(o.seed);
        for (std::size_t i = 0; i < o.pairs; ++i) {
            auto a = random_transform(f, o.n, rng);
            pairs.emplace_back(std::move(a), random_transform(f, o.n, rng));
        }
    }
    const auto rep = verify_chain_rule(pairs, cls);
    emit(io::check_report_to_json(rep), o);
    return rep.ok ? 0 : 1;
}

int run_cremona(const Options &o)
{
    const auto rep = cremona_identities(FieldDescriptor::parse(o.field), o.n);
    emit(io::check_report_to_json(rep), o);
    return rep.ok ? 0 : 1;
}

int run_h_check(const Options &o)
{
    const FieldDescriptor f = FieldDescriptor::parse(o.field);
    const auto rep = h_functional_equation_check(io::rf_matrix_from_json(read_json(input(o, 0, "h file")), f));
    emit(io::check_report_to_json(rep), o);
    return rep.ok ? 0 : 1;
}

// Writes <out>/case-<seed>.json holding the constant representation, the gauge
// and the twisted cocycle, plus a manifest.
int run_gen_corpus(const Options &o)
{
    if (o.out.empty()) {
        throw UsageError("gen-corpus needs --out DIR");
    }
    const FieldDescriptor f = FieldDescriptor::parse(o.field);
    const Semigroup s(o.semigroup);
    std::filesystem::create_directories(o.out);
    json files = json::array();
    for (std::size_t i = 0; i < o.count; ++i) {
        const std::uint64_t seed = o.seed + i;
        const auto r = random_constant_representation(s, o.dim, f, seed);
        const auto g = random_gauge(o.dim, f, seed + 1000, o.complexity);
        auto c = twist(induce_constant(r, o.precision), g);
        const json j{{"generator", SEMILIN_GENERATOR_HASH},
                     {"seed", seed},
                     {"representation", io::representation_to_json(r)},
                     {"gauge", io::series_matrix_to_json(g.g)},
                     {"cocycle", io::cocycle_to_json(c)}};
        const std::string name = "case-" + std::to_string(seed) + ".json";
        std::ofstream(std::filesystem::path(o.out) / name) << j.dump(2) << "\n";
        files.push_back(name);
    }
    const json manifest{{"generator", SEMILIN_GENERATOR_HASH},
                        {"semigroup", o.semigroup},
                        {"dim", o.dim},
                        {"field", o.field},
                        {"precision", o.precision},
                        {"complexity", o.complexity},
                        {"files", files}};
    std::ofstream(std::filesystem::path(o.out) / "manifest.json") << manifest.dump(2) << "\n";
    std::cout << manifest.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Exact local trivialization of semi-linear cocycles and PGL/Cremona checks"};
    app.require_subcommand(1);
    Options o;

    const auto common = [&o](CLI::App *sc, bool files) {
        sc->add_option("--precision", o.precision, "working precision M (>= 8)")->check(CLI::Range(8L, 1L << 20));
        sc->add_option("--field", o.field, "q or cyclo:N");
        sc->add_option("--seed", o.seed, "random seed");
        sc->add_option("--out", o.out, "output path");
        if (files) {
            sc->add_option("inputs", o.inputs, "input files");
        }
    };
    auto *verify = app.add_subcommand("verify", "check the cocycle condition on generator pairs");
    common(verify, true);
    auto *tw = app.add_subcommand("twist", "twist a cocycle by a gauge file or a seeded random gauge");
    common(tw, true);
    tw->add_option("--complexity", o.complexity, "random gauge complexity");
    auto *triv = app.add_subcommand("trivialize", "compute a trivialization certificate");
    common(triv, true);
    triv->add_option("--trials", o.trials, "cyclic vector trials");
    auto *vc = app.add_subcommand("verify-cert", "check a certificate against a cocycle");
    common(vc, true);
    auto *cls = app.add_subcommand("classify", "classify a one-dimensional cocycle");
    common(cls, true);
    auto *pgl = app.add_subcommand("pgl-check", "chain rule for degree-one PGL cocycles");
    common(pgl, true);
    pgl->add_option("--n", o.n, "number of variables");
    pgl->add_option("--m", o.m, "exponent m");
    pgl->add_option("--pairs", o.pairs, "random pairs when no transform file is given");
    pgl->add_flag("--omega", o.omega, "compare the Jacobian cocycle with the m = n+1 formula");
    auto *cre = app.add_subcommand("cremona-check", "Cremona generator identities");
    common(cre, false);
    cre->add_option("--n", o.n, "number of variables (>= 2)");
    auto *hc = app.add_subcommand("h-check", "functional equations for a matrix of functions of x1");
    common(hc, true);
    auto *gen = app.add_subcommand("gen-corpus", "write seeded round-trip cases");
    common(gen, false);
    gen->add_option("--dim", o.dim, "dimension N");
    gen->add_option("--semigroup", o.semigroup, "generators")->delimiter(',');
    gen->add_option("--count", o.count, "number of cases");
    gen->add_option("--complexity", o.complexity, "random gauge complexity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App *sc = app.get_subcommands().front();
    const std::string cmd = sc->get_name();
    try {
        if (cmd == "verify") return run_verify(o);
        if (cmd == "twist") return run_twist(o);
        if (cmd == "trivialize") return run_trivialize(o);
        if (cmd == "verify-cert") return run_verify_cert(o);
        if (cmd == "classify") return run_classify(o);
        if (cmd == "pgl-check") return run_pgl_check(o);
        if (cmd == "cremona-check") return run_cremona(o);
        if (cmd == "h-check") return run_h_check(o);
        if (cmd == "gen-corpus") return run_gen_corpus(o);
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const error &e) {
        const json j{{"check", cmd}, {"ok", false}, {"error", e.kind()}, {"witness", e.what()}};
        std::cout << j.dump(2) << "\n";
        return 1;
    }
    return 2;
}
