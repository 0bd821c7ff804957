#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "kscert/certifier.hpp"
#include "kscert/comparison.hpp"
#include "kscert/entropy.hpp"
#include "kscert/measure.hpp"
#include "kscert/numeric.hpp"
#include "kscert/scenarios.hpp"

namespace kscert {

using Json = nlohmann::ordered_json;

/// Deterministic serialization: insertion-ordered keys, floats rendered
/// with 15 significant digits, non-finite floats as the strings "inf",
/// "-inf", "nan". Re-parsing and re-dumping the output is byte-stable.
std::string dump_json(const Json& j, int indent = 2);

/// json::parse with ValidationError diagnostics carrying the line number.
Json parse_json_text(const std::string& text);

/// Reads a float that may have been serialized as "inf"/"-inf"/"nan".
double double_from_json(const Json& j, const std::string& path);

namespace io_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw ValidationError(path + ": " + what);
}

void require_keys(const Json& obj, const std::string& path,
                  const std::vector<std::string>& required,
                  const std::vector<std::string>& optional);

}  // namespace io_detail

// ---- scalars ----------------------------------------------------------

template <class S>
S scalar_from_json(const Json& j, const std::string& path) {
    try {
        if constexpr (is_exact_scalar_v<S>) {
            if (j.is_string()) return rational_from_text(j.get<std::string>());
            if (j.is_number_integer()) return Rational(j.get<long long>());
            if (j.is_number_unsigned()) return Rational(j.get<unsigned long long>());
            if (j.is_number_float()) return rational_from_double_literal(j.get<double>());
        } else {
            if (j.is_string()) return to_double(rational_from_text(j.get<std::string>()));
            if (j.is_number()) return j.get<double>();
        }
    } catch (const ValidationError& e) {
        io_detail::fail(path, e.what());
    }
    io_detail::fail(path, "expected a number or a \"num/den\" string");
}

inline Json scalar_to_json(double v) { return Json(v); }
inline Json scalar_to_json(const Rational& v) { return Json(to_fraction_string(v)); }

// ---- measures ---------------------------------------------------------

template <class S>
Measure<S> measure_from_json(const Json& j, const std::string& path) {
    if (!j.is_object() || j.size() != 1)
        io_detail::fail(path, "expected exactly one of {\"bernoulli\", \"markov\", \"lumped\"}");
    const std::string kind = j.begin().key();
    const Json& body = j.begin().value();
    if (kind == "bernoulli") {
        if (!body.is_array()) io_detail::fail(path + ".bernoulli", "expected an array of weights");
        std::vector<S> w;
        for (std::size_t i = 0; i < body.size(); ++i)
            w.push_back(scalar_from_json<S>(body[i], path + ".bernoulli[" + std::to_string(i) + "]"));
        try {
            return Measure<S>::bernoulli(ProbVector<S>(std::move(w)));
        } catch (const ValidationError& e) {
            io_detail::fail(path + ".bernoulli", e.what());
        }
    }
    if (kind == "markov") {
        io_detail::require_keys(body, path + ".markov", {"P"}, {"pi"});
        const Json& pj = body.at("P");
        if (!pj.is_array()) io_detail::fail(path + ".markov.P", "expected a matrix");
        Matrix<S> P;
        for (std::size_t i = 0; i < pj.size(); ++i) {
            if (!pj[i].is_array()) io_detail::fail(path + ".markov.P", "expected a matrix");
            std::vector<S> row;
            for (std::size_t c = 0; c < pj[i].size(); ++c)
                row.push_back(scalar_from_json<S>(
                    pj[i][c], path + ".markov.P[" + std::to_string(i) + "][" + std::to_string(c) + "]"));
            P.push_back(std::move(row));
        }
        std::optional<ProbVector<S>> pi;
        try {
            if (body.contains("pi")) {
                std::vector<S> piv;
                for (std::size_t i = 0; i < body.at("pi").size(); ++i)
                    piv.push_back(scalar_from_json<S>(body.at("pi")[i],
                                                      path + ".markov.pi[" + std::to_string(i) + "]"));
                pi.emplace(std::move(piv));
            }
            return Measure<S>::markov(std::move(P), std::move(pi));
        } catch (const ValidationError& e) {
            io_detail::fail(path + ".markov", e.what());
        }
    }
    if (kind == "lumped") {
        io_detail::require_keys(body, path + ".lumped", {"base", "map"}, {});
        Measure<S> base = measure_from_json<S>(body.at("base"), path + ".lumped.base");
        const Json& mj = body.at("map");
        if (!mj.is_array()) io_detail::fail(path + ".lumped.map", "expected an array of symbol indices");
        std::vector<Symbol> map;
        for (const auto& entry : mj) {
            if (!entry.is_number_unsigned() && !entry.is_number_integer())
                io_detail::fail(path + ".lumped.map", "entries must be nonnegative integers");
            long long v = entry.get<long long>();
            if (v < 0) io_detail::fail(path + ".lumped.map", "entries must be nonnegative");
            map.push_back(static_cast<Symbol>(v));
        }
        try {
            return Measure<S>::lumped(std::move(base), std::move(map));
        } catch (const ValidationError& e) {
            io_detail::fail(path + ".lumped", e.what());
        }
    }
    io_detail::fail(path, "unknown measure kind '" + kind + "'");
}

template <class S>
Json measure_to_json(const Measure<S>& mu) {
    Json j = Json::object();
    switch (mu.kind()) {
        case MeasureKind::bernoulli: {
            Json w = Json::array();
            for (const auto& v : mu.weights()) w.push_back(scalar_to_json(v));
            j["bernoulli"] = std::move(w);
            break;
        }
        case MeasureKind::markov: {
            Json body = Json::object();
            Json P = Json::array();
            for (const auto& row : mu.transition()) {
                Json r = Json::array();
                for (const auto& v : row) r.push_back(scalar_to_json(v));
                P.push_back(std::move(r));
            }
            body["P"] = std::move(P);
            Json pi = Json::array();
            for (const auto& v : mu.initial()) pi.push_back(scalar_to_json(v));
            body["pi"] = std::move(pi);
            j["markov"] = std::move(body);
            break;
        }
        case MeasureKind::lumped: {
            Json body = Json::object();
            Json base = Json::object();
            {
                Json inner = Json::object();
                Json P = Json::array();
                for (const auto& row : mu.transition()) {
                    Json r = Json::array();
                    for (const auto& v : row) r.push_back(scalar_to_json(v));
                    P.push_back(std::move(r));
                }
                inner["P"] = std::move(P);
                Json pi = Json::array();
                for (const auto& v : mu.initial()) pi.push_back(scalar_to_json(v));
                inner["pi"] = std::move(pi);
                base["markov"] = std::move(inner);
            }
            body["base"] = std::move(base);
            Json map = Json::array();
            for (Symbol s : mu.lump_map()) map.push_back(static_cast<std::uint64_t>(s));
            body["map"] = std::move(map);
            j["lumped"] = std::move(body);
            break;
        }
    }
    return j;
}

// ---- scenario files ---------------------------------------------------

using AnyScenario = std::variant<ScenarioSpec<Rational>, ScenarioSpec<double>>;

struct ScenarioDocument {
    std::string mode;  // "rational" | "float"
    AnyScenario spec;
};

/// Parses the scenario file schema. Unknown keys are rejected. "mode"
/// defaults to "rational": JSON literals are decimal and therefore exact.
ScenarioDocument scenario_from_json(const Json& j);

template <class S>
Json scenario_to_json(const ScenarioSpec<S>& spec, const std::string& mode) {
    Json j = Json::object();
    j["mu0"] = measure_to_json(spec.mu0);
    Json stages = Json::array();
    for (const auto& stage : spec.stages) {
        Json sj = Json::object();
        sj["mun"] = measure_to_json(stage.mun);
        sj["r"] = static_cast<std::uint64_t>(stage.r);
        if (stage.eps) sj["eps"] = scalar_to_json(*stage.eps);
        stages.push_back(std::move(sj));
    }
    j["stages"] = std::move(stages);
    j["target_h"] = spec.target_h;
    Json gen = Json::object();
    gen["value"] = spec.generator.value;
    gen["justification"] = spec.generator.justification;
    j["generator_declared"] = std::move(gen);
    if (spec.coarsen_m) j["coarsen_m"] = static_cast<std::uint64_t>(*spec.coarsen_m);
    j["mode"] = mode;
    j["budget"] = static_cast<std::uint64_t>(spec.budget);
    return j;
}

// ---- reports ----------------------------------------------------------

Json word_to_json(const Word& w, const Alphabet& alphabet);

template <class S>
Json comparison_to_json(const ComparisonReport<S>& rep, const Alphabet& alphabet) {
    Json j = Json::object();
    j["depth"] = static_cast<std::uint64_t>(rep.depth);
    j["c_star"] = rep.infinite ? Json(std::numeric_limits<double>::infinity())
                               : Json(to_double(rep.c_star));
    if constexpr (is_exact_scalar_v<S>) {
        if (!rep.infinite) j["c_star_exact"] = to_fraction_string(rep.c_star);
    }
    j["ratio_max"] = to_double(rep.ratio_max);
    j["ratio_min"] = to_double(rep.ratio_min);
    if constexpr (is_exact_scalar_v<S>) {
        j["ratio_max_exact"] = to_fraction_string(rep.ratio_max);
        j["ratio_min_exact"] = to_fraction_string(rep.ratio_min);
    }
    j["witness_max"] = word_to_json(rep.witness_max, alphabet);
    j["witness_min"] = word_to_json(rep.witness_min, alphabet);
    j["witness_infinite"] =
        rep.witness_infinite ? word_to_json(*rep.witness_infinite, alphabet) : Json(nullptr);
    return j;
}

Json entropy_report_to_json(const EntropyReport& report, const std::string& measure_name);
Json remark_grid_to_json(const RemarkGrid& grid);
Json lemma1_to_json(const Lemma1Verdict& v);

// ---- certificates -----------------------------------------------------

Json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const Json& j);
std::string render_certificate_table(const Certificate& cert);

}  // namespace kscert
