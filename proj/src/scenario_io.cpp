#include "kscert/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kscert {

// ---- deterministic dumping ---------------------------------------------

namespace {

void dump_value(const Json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string closing(static_cast<std::size_t>(indent) * depth, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += Json(it.key()).dump();
                out += ": ";
                dump_value(it.value(), out, indent, depth + 1);
            }
            out += "\n" + closing + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& item : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                dump_value(item, out, indent, depth + 1);
            }
            out += "\n" + closing + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isfinite(v))
                out += format_float15(v);
            else if (std::isnan(v))
                out += "\"nan\"";
            else
                out += v > 0 ? "\"inf\"" : "\"-inf\"";
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
    std::string out;
    dump_value(j, out, indent, 0);
    out += "\n";
    return out;
}

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte, text.size());
        for (std::size_t i = 0; i < limit; ++i)
            if (text[i] == '\n') ++line;
        throw ValidationError("JSON parse error at line " + std::to_string(line) + ": " +
                              e.what());
    }
}

double double_from_json(const Json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        try {
            return to_double(rational_from_text(s));
        } catch (const ValidationError&) {
        }
    }
    io_detail::fail(path, "expected a number");
}

namespace io_detail {

void require_keys(const Json& obj, const std::string& path,
                  const std::vector<std::string>& required,
                  const std::vector<std::string>& optional) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& key = it.key();
        const bool known =
            std::find(required.begin(), required.end(), key) != required.end() ||
            std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known) fail(path, "unknown key \"" + key + "\"");
    }
    for (const auto& key : required)
        if (!obj.contains(key)) fail(path, "missing required key \"" + key + "\"");
}

}  // namespace io_detail

// ---- scenario parsing ---------------------------------------------------

namespace {

std::size_t size_from_json(const Json& j, const std::string& path, std::size_t minimum) {
    if (!j.is_number_unsigned() && !j.is_number_integer())
        io_detail::fail(path, "expected a nonnegative integer");
    const long long v = j.get<long long>();
    if (v < static_cast<long long>(minimum))
        io_detail::fail(path, "must be >= " + std::to_string(minimum));
    return static_cast<std::size_t>(v);
}

template <class S>
ScenarioSpec<S> parse_spec(const Json& j) {
    Measure<S> mu0 = measure_from_json<S>(j.at("mu0"), "scenario.mu0");

    std::vector<Stage<S>> stages;
    const Json& sj = j.at("stages");
    if (!sj.is_array()) io_detail::fail("scenario.stages", "expected an array");
    for (std::size_t i = 0; i < sj.size(); ++i) {
        const std::string path = "scenario.stages[" + std::to_string(i) + "]";
        io_detail::require_keys(sj[i], path, {"mun", "r"}, {"eps"});
        Stage<S> stage{measure_from_json<S>(sj[i].at("mun"), path + ".mun"),
                       size_from_json(sj[i].at("r"), path + ".r", 1), std::nullopt};
        if (!(stage.mun.alphabet() == mu0.alphabet()))
            io_detail::fail(path + ".mun", "stage measure alphabet differs from mu0");
        if (sj[i].contains("eps")) {
            S eps = scalar_from_json<S>(sj[i].at("eps"), path + ".eps");
            if (eps < S(0)) io_detail::fail(path + ".eps", "must be nonnegative");
            stage.eps = std::move(eps);
        }
        stages.push_back(std::move(stage));
    }

    const double target = scalar_from_json<double>(j.at("target_h"), "scenario.target_h");

    const Json& gj = j.at("generator_declared");
    io_detail::require_keys(gj, "scenario.generator_declared", {"value"}, {"justification"});
    if (!gj.at("value").is_boolean())
        io_detail::fail("scenario.generator_declared.value", "expected a boolean");
    GeneratorDeclaration gen;
    gen.value = gj.at("value").get<bool>();
    if (gj.contains("justification")) {
        if (!gj.at("justification").is_string())
            io_detail::fail("scenario.generator_declared.justification", "expected a string");
        gen.justification = gj.at("justification").get<std::string>();
    }

    std::optional<std::size_t> coarsen_m;
    if (j.contains("coarsen_m"))
        coarsen_m = size_from_json(j.at("coarsen_m"), "scenario.coarsen_m", 1);

    std::size_t budget = kDefaultBudget;
    if (j.contains("budget")) budget = size_from_json(j.at("budget"), "scenario.budget", 1);

    return ScenarioSpec<S>{std::move(mu0), std::move(stages), target, std::move(gen),
                           coarsen_m, budget};
}

}  // namespace

ScenarioDocument scenario_from_json(const Json& j) {
    io_detail::require_keys(j, "scenario", {"mu0", "stages", "target_h", "generator_declared"},
                            {"coarsen_m", "mode", "budget"});
    std::string mode = "rational";
    if (j.contains("mode")) {
        if (!j.at("mode").is_string())
            io_detail::fail("scenario.mode", "expected \"rational\" or \"float\"");
        mode = j.at("mode").get<std::string>();
        if (mode != "rational" && mode != "float")
            io_detail::fail("scenario.mode", "expected \"rational\" or \"float\", got \"" +
                                                 mode + "\"");
    }
    if (mode == "rational") return ScenarioDocument{mode, parse_spec<Rational>(j)};
    return ScenarioDocument{mode, parse_spec<double>(j)};
}

// ---- report helpers -----------------------------------------------------

Json word_to_json(const Word& w, const Alphabet& alphabet) {
    Json j = Json::object();
    Json symbols = Json::array();
    for (Symbol s : w.symbols) symbols.push_back(static_cast<std::uint64_t>(s));
    j["symbols"] = std::move(symbols);
    j["rendered"] = render_word(w, alphabet);
    return j;
}

Json entropy_report_to_json(const EntropyReport& report, const std::string& measure_name) {
    Json j = Json::object();
    j["measure"] = measure_name;
    j["block_entropies"] = report.block_entropies;
    j["averages"] = report.averages;
    j["increments"] = report.increments;
    j["ks_exact"] = report.ks_exact ? Json(*report.ks_exact) : Json(nullptr);
    return j;
}

Json remark_grid_to_json(const RemarkGrid& grid) {
    Json j = Json::object();
    Json ms = Json::array();
    for (std::size_t m : grid.m_values) ms.push_back(static_cast<std::uint64_t>(m));
    j["m_values"] = std::move(ms);
    j["r"] = static_cast<std::uint64_t>(grid.block_len);
    Json stages = Json::array();
    for (std::size_t n : grid.stage_indices) stages.push_back(static_cast<std::uint64_t>(n));
    j["stages"] = std::move(stages);
    j["values"] = grid.values;
    return j;
}

Json lemma1_to_json(const Lemma1Verdict& v) {
    Json j = Json::object();
    j["c_star"] = v.c_infinite ? Json(std::numeric_limits<double>::infinity()) : Json(v.c_star);
    j["applicable"] = v.applicable;
    j["holds"] = v.holds;
    j["H_p"] = v.entropy_p;
    j["H_q"] = v.entropy_q;
    j["bound"] = v.bound;
    j["slack"] = v.slack;
    j["formula"] = "H(p) <= (1+c)*H(q) + c*ln(3) for c = c_star < 1/3";
    return j;
}

// ---- certificates -------------------------------------------------------

namespace {

Json optional_string(const std::string& s) { return s.empty() ? Json(nullptr) : Json(s); }

std::string string_or_empty(const Json& j, const std::string& key) {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    return j.at(key).get<std::string>();
}

Json audit_formulas() {
    Json a = Json::object();
    a["eps_star"] =
        "max over length-(r+1) words A of |mu0(A)/mun(A) - 1|; infinite when mu0(A) > 0 and "
        "mun(A) = 0; 0/0 atoms are satisfied by convention";
    a["eps_ok"] = "eps_star <= eps_declared (exact in rational mode)";
    a["c"] = "2 * eps_declared (flip step, valid for eps_declared <= 1/2)";
    a["lemma_applicable"] = "c < 1/3, i.e. eps_declared < 1/6";
    a["H_mun / H_mu0"] = "sum over length-r words w of -mu(w) ln mu(w), in nats";
    a["chain"] = "H_mun <= (1+c)*H_mu0 + c*ln(3), slack = rhs - lhs >= -tolerance";
    a["h_mun_upper"] = "H_mun / r, an upper bound for the per-symbol entropy of mu_n";
    a["stage_bound"] =
        "(h_mun_upper - c*ln(3)/r) / (1+c), a certified lower bound for H_mu0 / r";
    a["verdict.exact"] =
        "PASS iff closeness holds at every stage, every usable chain holds, at least one "
        "stage is usable, the generator is declared, and h_mu0_exact >= target_h - tolerance";
    a["verdict.finite-evidence"] =
        "PASS certifies only the verified finite-stage facts; FAIL on any violated closeness "
        "or chain; INCONCLUSIVE when no stage is usable or the generator is not declared";
    return a;
}

Json step_to_json(const CertificateStep& s) {
    Json j = Json::object();
    j["n"] = static_cast<std::uint64_t>(s.n);
    j["r"] = static_cast<std::uint64_t>(s.r);
    j["eps_star"] = s.eps_star;
    j["eps_star_exact"] = optional_string(s.eps_star_exact);
    Json w = Json::object();
    Json symbols = Json::array();
    for (Symbol sym : s.witness.symbols) symbols.push_back(static_cast<std::uint64_t>(sym));
    w["symbols"] = std::move(symbols);
    w["rendered"] = s.witness_rendered;
    j["witness"] = std::move(w);
    j["eps_declared"] = s.eps_declared;
    j["eps_declared_exact"] = optional_string(s.eps_declared_exact);
    j["eps_was_computed"] = s.eps_was_computed;
    j["eps_ok"] = s.eps_ok;
    j["c"] = s.c;
    j["c_exact"] = optional_string(s.c_exact);
    j["lemma_applicable"] = s.lemma_applicable;
    j["H_mun"] = s.entropy_mun;
    j["H_mu0"] = s.entropy_mu0;
    j["chain_lhs"] = s.chain_lhs;
    j["chain_rhs"] = s.chain_rhs;
    j["chain_slack"] = s.chain_slack;
    j["chain_holds"] = s.chain_holds;
    j["h_mun_upper"] = s.h_mun_upper;
    j["stage_bound"] = s.stage_bound;
    return j;
}

CertificateStep step_from_json(const Json& j) {
    CertificateStep s;
    s.n = j.at("n").get<std::size_t>();
    s.r = j.at("r").get<std::size_t>();
    s.eps_star = double_from_json(j.at("eps_star"), "step.eps_star");
    s.eps_star_infinite = std::isinf(s.eps_star);
    s.eps_star_exact = string_or_empty(j, "eps_star_exact");
    for (const auto& sym : j.at("witness").at("symbols"))
        s.witness.symbols.push_back(sym.get<Symbol>());
    s.witness_rendered = j.at("witness").at("rendered").get<std::string>();
    s.eps_declared = double_from_json(j.at("eps_declared"), "step.eps_declared");
    s.eps_declared_exact = string_or_empty(j, "eps_declared_exact");
    s.eps_was_computed = j.at("eps_was_computed").get<bool>();
    s.eps_ok = j.at("eps_ok").get<bool>();
    s.c = double_from_json(j.at("c"), "step.c");
    s.c_exact = string_or_empty(j, "c_exact");
    s.lemma_applicable = j.at("lemma_applicable").get<bool>();
    s.entropy_mun = double_from_json(j.at("H_mun"), "step.H_mun");
    s.entropy_mu0 = double_from_json(j.at("H_mu0"), "step.H_mu0");
    s.chain_lhs = double_from_json(j.at("chain_lhs"), "step.chain_lhs");
    s.chain_rhs = double_from_json(j.at("chain_rhs"), "step.chain_rhs");
    s.chain_slack = double_from_json(j.at("chain_slack"), "step.chain_slack");
    s.chain_holds = j.at("chain_holds").get<bool>();
    s.h_mun_upper = double_from_json(j.at("h_mun_upper"), "step.h_mun_upper");
    s.stage_bound = double_from_json(j.at("stage_bound"), "step.stage_bound");
    return s;
}

}  // namespace

Json certificate_to_json(const Certificate& cert) {
    Json j = Json::object();
    j["mode"] = cert.mode;
    j["conclusion_mode"] = cert.conclusion_mode;
    j["tolerance"] = cert.tolerance;
    j["target_h"] = cert.target_h;
    j["h_mu0_exact"] = cert.h_mu0_exact ? Json(*cert.h_mu0_exact) : Json(nullptr);
    j["coarsen_m"] = cert.coarsen_m ? Json(static_cast<std::uint64_t>(*cert.coarsen_m))
                                    : Json(nullptr);

    Json hyp = Json::object();
    Json limits = Json::object();
    limits["ok"] = cert.hypotheses.limits_ok;
    limits["warnings"] = cert.hypotheses.limit_warnings;
    hyp["limits"] = std::move(limits);
    Json gen = Json::object();
    gen["declared"] = cert.hypotheses.generator_declared;
    gen["justification"] = cert.hypotheses.generator_justification;
    hyp["generator"] = std::move(gen);
    Json close = Json::object();
    close["ok"] = cert.hypotheses.closeness_ok;
    close["failed_stage"] =
        cert.hypotheses.closeness_failed_stage
            ? Json(static_cast<std::uint64_t>(*cert.hypotheses.closeness_failed_stage))
            : Json(nullptr);
    close["witness"] = optional_string(cert.hypotheses.closeness_witness);
    hyp["closeness"] = std::move(close);
    j["hypotheses"] = std::move(hyp);

    Json steps = Json::array();
    for (const auto& s : cert.steps) steps.push_back(step_to_json(s));
    j["steps"] = std::move(steps);
    j["verdict"] = verdict_name(cert.verdict);
    j["notes"] = cert.notes;
    j["audit"] = audit_formulas();
    return j;
}

Certificate certificate_from_json(const Json& j) {
    Certificate cert;
    cert.mode = j.at("mode").get<std::string>();
    cert.conclusion_mode = j.at("conclusion_mode").get<std::string>();
    cert.tolerance = double_from_json(j.at("tolerance"), "certificate.tolerance");
    cert.target_h = double_from_json(j.at("target_h"), "certificate.target_h");
    if (!j.at("h_mu0_exact").is_null())
        cert.h_mu0_exact = double_from_json(j.at("h_mu0_exact"), "certificate.h_mu0_exact");
    if (!j.at("coarsen_m").is_null())
        cert.coarsen_m = j.at("coarsen_m").get<std::size_t>();

    const Json& hyp = j.at("hypotheses");
    cert.hypotheses.limits_ok = hyp.at("limits").at("ok").get<bool>();
    for (const auto& w : hyp.at("limits").at("warnings"))
        cert.hypotheses.limit_warnings.push_back(w.get<std::string>());
    cert.hypotheses.generator_declared = hyp.at("generator").at("declared").get<bool>();
    cert.hypotheses.generator_justification =
        hyp.at("generator").at("justification").get<std::string>();
    cert.hypotheses.closeness_ok = hyp.at("closeness").at("ok").get<bool>();
    if (!hyp.at("closeness").at("failed_stage").is_null())
        cert.hypotheses.closeness_failed_stage =
            hyp.at("closeness").at("failed_stage").get<std::size_t>();
    cert.hypotheses.closeness_witness = string_or_empty(hyp.at("closeness"), "witness");

    for (const auto& sj : j.at("steps")) cert.steps.push_back(step_from_json(sj));

    const std::string verdict = j.at("verdict").get<std::string>();
    if (verdict == "PASS")
        cert.verdict = Verdict::pass;
    else if (verdict == "FAIL")
        cert.verdict = Verdict::fail;
    else if (verdict == "INCONCLUSIVE")
        cert.verdict = Verdict::inconclusive;
    else
        io_detail::fail("certificate.verdict", "unknown verdict \"" + verdict + "\"");
    for (const auto& note : j.at("notes")) cert.notes.push_back(note.get<std::string>());
    return cert;
}

namespace {

std::string fmt_or_exact(double value, const std::string& exact) {
    std::string s;
    if (std::isinf(value))
        s = value > 0 ? "inf" : "-inf";
    else
        s = format_float15(value);
    if (!exact.empty()) s += " (= " + exact + ")";
    return s;
}

}  // namespace

std::string render_certificate_table(const Certificate& cert) {
    std::ostringstream out;
    out << "verdict: " << verdict_name(cert.verdict) << "\n";
    out << "mode: " << cert.mode << "   conclusion_mode: " << cert.conclusion_mode
        << "   tolerance: " << format_float15(cert.tolerance) << "\n";
    out << "target_h: " << format_float15(cert.target_h);
    if (cert.h_mu0_exact)
        out << "   h_mu0_exact: " << format_float15(*cert.h_mu0_exact);
    else
        out << "   h_mu0_exact: unavailable";
    if (cert.coarsen_m) out << "   coarsen_m: " << *cert.coarsen_m;
    out << "\n";
    out << "hypotheses:\n";
    out << "  limits (r_n up, eps_n down): " << (cert.hypotheses.limits_ok ? "ok" : "warning")
        << "\n";
    for (const auto& w : cert.hypotheses.limit_warnings) out << "    - " << w << "\n";
    out << "  generator declared: " << (cert.hypotheses.generator_declared ? "yes" : "no");
    if (!cert.hypotheses.generator_justification.empty())
        out << " (" << cert.hypotheses.generator_justification << ")";
    out << "\n";
    out << "  closeness (eps* <= eps_n): " << (cert.hypotheses.closeness_ok ? "ok" : "FAILED");
    if (cert.hypotheses.closeness_failed_stage)
        out << " at stage " << *cert.hypotheses.closeness_failed_stage << ", witness "
            << cert.hypotheses.closeness_witness;
    out << "\n";
    out << "stages:\n";
    for (const auto& s : cert.steps) {
        out << "  stage " << s.n << " (r = " << s.r << ")\n";
        out << "    eps_star:     " << fmt_or_exact(s.eps_star, s.eps_star_exact)
            << "   witness: " << s.witness_rendered << "\n";
        out << "    eps_declared: " << fmt_or_exact(s.eps_declared, s.eps_declared_exact)
            << (s.eps_was_computed ? " [computed]" : "") << "   eps_ok: "
            << (s.eps_ok ? "yes" : "NO") << "\n";
        out << "    c = 2*eps:    " << fmt_or_exact(s.c, s.c_exact)
            << "   lemma_applicable: " << (s.lemma_applicable ? "yes" : "no") << "\n";
        out << "    H_mun: " << format_float15(s.entropy_mun)
            << "   H_mu0: " << format_float15(s.entropy_mu0) << "\n";
        if (s.lemma_applicable) {
            out << "    chain: " << format_float15(s.chain_lhs)
                << " <= " << format_float15(s.chain_rhs)
                << "   slack: " << format_float15(s.chain_slack) << "   "
                << (s.chain_holds ? "holds" : "VIOLATED") << "\n";
            out << "    h_mun_upper: " << format_float15(s.h_mun_upper)
                << "   stage_bound: " << format_float15(s.stage_bound) << "\n";
        } else {
            out << "    chain: not evaluated (stage unusable)   h_mun_upper: "
                << format_float15(s.h_mun_upper) << "\n";
        }
    }
    out << "notes:\n";
    for (const auto& note : cert.notes) out << "  - " << note << "\n";
    return out.str();
}

}  // namespace kscert
