#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kscert/comparison.hpp"
#include "kscert/entropy.hpp"
#include "kscert/measure.hpp"

namespace kscert {

struct GeneratorDeclaration {
    bool value = false;
    std::string justification;
};

template <class S>
struct Stage {
    Measure<S> mun;
    std::size_t r = 1;             // closeness depth; block entropies use length r
    std::optional<S> eps;          // declared eps_n; absent = use computed eps*
};

/// A finite verification plan: the reference measure, the approximating
/// stages with their depths and declared closeness constants, and the
/// entropy bound to certify.
template <class S>
struct ScenarioSpec {
    Measure<S> mu0;
    std::vector<Stage<S>> stages;
    double target_h = 0.0;
    GeneratorDeclaration generator;
    std::optional<std::size_t> coarsen_m;   // atom count of the coarsened partition
    std::size_t budget = kDefaultBudget;
};

/// `keep` argument of coarsen() for the m-atom coarsened partition:
/// atoms {0..m-2} plus a TAIL atom; m == alphabet size is the identity.
inline std::size_t remark_keep_count(std::size_t m, std::size_t k) {
    if (m < 1 || m > k)
        throw ValidationError("coarsening atom count " + std::to_string(m) +
                              " out of range 1.." + std::to_string(k));
    return m >= k ? k : m - 1;
}

struct CertificateStep {
    std::size_t n = 0;  // 1-based stage index
    std::size_t r = 0;

    bool eps_star_infinite = false;
    double eps_star = 0.0;
    std::string eps_star_exact;       // "num/den" in rational mode
    Word witness;                     // reproduces eps* (or the support violation)
    std::string witness_rendered;

    double eps_declared = 0.0;
    std::string eps_declared_exact;
    bool eps_was_computed = false;    // declared eps defaulted to eps*
    bool eps_ok = false;

    double c = 0.0;                   // flipped constant 2 * eps_declared
    std::string c_exact;
    bool lemma_applicable = false;    // c < 1/3, i.e. eps_declared < 1/6

    double entropy_mun = 0.0;         // H_{mu_n} over length-r blocks
    double entropy_mu0 = 0.0;
    double chain_lhs = 0.0;
    double chain_rhs = 0.0;           // (1+c) H_mu0 + c ln 3
    double chain_slack = 0.0;
    bool chain_holds = false;
    double h_mun_upper = 0.0;         // H_mun / r
    double stage_bound = 0.0;         // certified lower bound for H_mu0 / r
};

struct HypothesisReport {
    bool limits_ok = true;                 // (1): r_n strictly increasing, eps_n non-increasing
    std::vector<std::string> limit_warnings;
    bool generator_declared = false;       // (2): recorded, never inferred
    std::string generator_justification;
    bool closeness_ok = true;              // (3): eps* <= declared eps at every stage
    std::optional<std::size_t> closeness_failed_stage;
    std::string closeness_witness;
};

enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "PASS";
        case Verdict::fail: return "FAIL";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

struct Certificate {
    std::string mode;             // "rational" | "float"
    std::string conclusion_mode;  // "exact" | "finite-evidence"
    double tolerance = 1e-9;
    double target_h = 0.0;
    std::optional<double> h_mu0_exact;
    std::optional<std::size_t> coarsen_m;
    std::vector<CertificateStep> steps;
    HypothesisReport hypotheses;
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> notes;
};

namespace detail {

template <class S>
std::string exact_string(const S& value) {
    if constexpr (is_exact_scalar_v<S>)
        return to_fraction_string(value);
    else
        return std::string();
}

template <class S>
ScenarioSpec<S> coarsened_view(const ScenarioSpec<S>& spec) {
    if (!spec.coarsen_m) return spec;
    const std::size_t k = spec.mu0.alphabet_size();
    const std::size_t m = *spec.coarsen_m;
    if (m < 2)
        throw ValidationError("scenario coarsen_m must be >= 2 (a single-atom partition "
                              "certifies nothing)");
    const std::size_t keep = remark_keep_count(m, k);
    ScenarioSpec<S> out = spec;
    out.mu0 = coarsen(spec.mu0, keep);
    for (auto& stage : out.stages) stage.mun = coarsen(stage.mun, keep);
    return out;
}

}  // namespace detail

/// Verifies one stage: eps* at depth r_n, the declared-eps check, the
/// applicability gate c = 2 eps_n < 1/3, and the entropy comparison chain
/// over length-r_n blocks.
template <class S>
CertificateStep verify_step(const ScenarioSpec<S>& spec, std::size_t n, double tol = 1e-9,
                            const ExecPolicy& policy = {}) {
    if (n < 1 || n > spec.stages.size())
        throw ValidationError("stage index " + std::to_string(n) + " out of range 1.." +
                              std::to_string(spec.stages.size()));
    const auto& stage = spec.stages[n - 1];
    const double inf = std::numeric_limits<double>::infinity();

    CertificateStep step;
    step.n = n;
    step.r = stage.r;
    if (stage.r < 1) throw ValidationError("stage depth r must be >= 1");

    ComparisonReport<S> rep;
    try {
        rep = epsilon_star(spec.mu0, stage.mun, stage.r, EpsilonMethod::automatic, spec.budget,
                           policy);
    } catch (const ResourceError& e) {
        throw ResourceError("stage " + std::to_string(n) + ": " + e.what());
    }

    step.eps_star_infinite = rep.infinite;
    step.eps_star = rep.infinite ? inf : to_double(rep.c_star);
    if (!rep.infinite) step.eps_star_exact = detail::exact_string(rep.c_star);
    step.witness = rep.witness();
    step.witness_rendered = render_word(step.witness, spec.mu0.alphabet());

    // Declared eps; when absent the computed eps* is adopted verbatim.
    // No finite eps exists under a support violation, so eps_ok is then
    // false no matter what was declared.
    std::optional<S> declared = stage.eps;
    if (!declared && !rep.infinite) {
        declared = rep.c_star;
        step.eps_was_computed = true;
    }
    if (rep.infinite) {
        step.eps_declared = declared ? to_double(*declared) : inf;
        if (declared) step.eps_declared_exact = detail::exact_string(*declared);
        step.eps_ok = false;
        step.c = inf;
        step.lemma_applicable = false;
    } else {
        if (*declared < S(0)) throw ValidationError("declared eps must be nonnegative");
        step.eps_declared = to_double(*declared);
        step.eps_declared_exact = detail::exact_string(*declared);
        step.eps_ok = rep.c_star <= *declared;
        S c = S(2) * (*declared);
        step.c = to_double(c);
        step.c_exact = detail::exact_string(c);
        if constexpr (is_exact_scalar_v<S>)
            step.lemma_applicable = c < Rational(1, 3);
        else
            step.lemma_applicable = c < 1.0 / 3.0;
    }

    try {
        step.entropy_mun = block_entropy(stage.mun, stage.r, spec.budget, policy);
        step.entropy_mu0 = block_entropy(spec.mu0, stage.r, spec.budget, policy);
    } catch (const ResourceError& e) {
        throw ResourceError("stage " + std::to_string(n) + ": " + e.what());
    }
    step.h_mun_upper = step.entropy_mun / static_cast<double>(stage.r);
    step.chain_lhs = step.entropy_mun;
    if (step.lemma_applicable) {
        step.chain_rhs = (1.0 + step.c) * step.entropy_mu0 + step.c * kLn3;
        step.chain_slack = step.chain_rhs - step.chain_lhs;
        step.chain_holds = step.chain_slack >= -tol;
        step.stage_bound =
            (step.h_mun_upper - step.c * kLn3 / static_cast<double>(stage.r)) / (1.0 + step.c);
    } else {
        step.chain_rhs = inf;
        step.chain_slack = inf;
        step.chain_holds = false;
        step.stage_bound = -inf;
    }
    return step;
}

/// Runs every stage, assembles the hypothesis report and the verdict.
///
/// Exact mode (mu0 has a closed-form entropy) compares it against the
/// target; finite-evidence mode only certifies the verified finite-stage
/// facts and says so in the notes. Coarsening, when requested, applies to
/// every stage check; the closed form still refers to the original mu0.
template <class S>
Certificate certify(const ScenarioSpec<S>& spec, double tol = 1e-9,
                    const ExecPolicy& policy = {}) {
    if (spec.stages.empty()) throw ValidationError("scenario has no stages");

    ScenarioSpec<S> work = detail::coarsened_view(spec);

    Certificate cert;
    cert.mode = is_exact_scalar_v<S> ? "rational" : "float";
    cert.tolerance = tol;
    cert.target_h = spec.target_h;
    cert.coarsen_m = spec.coarsen_m;
    cert.h_mu0_exact = ks_entropy_closed_form(spec.mu0);
    cert.conclusion_mode = cert.h_mu0_exact ? "exact" : "finite-evidence";

    for (std::size_t n = 1; n <= work.stages.size(); ++n)
        cert.steps.push_back(verify_step(work, n, tol, policy));

    auto& hyp = cert.hypotheses;
    for (std::size_t i = 1; i < cert.steps.size(); ++i) {
        if (cert.steps[i].r <= cert.steps[i - 1].r)
            hyp.limit_warnings.push_back("stage " + std::to_string(i + 1) +
                                         ": depth r did not increase");
        if (cert.steps[i].eps_declared > cert.steps[i - 1].eps_declared)
            hyp.limit_warnings.push_back("stage " + std::to_string(i + 1) +
                                         ": declared eps increased");
    }
    hyp.limits_ok = hyp.limit_warnings.empty();
    hyp.generator_declared = spec.generator.value;
    hyp.generator_justification = spec.generator.justification;
    for (const auto& step : cert.steps) {
        if (!step.eps_ok && !hyp.closeness_failed_stage) {
            hyp.closeness_ok = false;
            hyp.closeness_failed_stage = step.n;
            hyp.closeness_witness = step.witness_rendered;
        }
    }

    std::size_t usable = 0;
    bool chain_ok = true;
    for (const auto& step : cert.steps) {
        if (step.eps_ok && step.lemma_applicable) {
            ++usable;
            chain_ok = chain_ok && step.chain_holds;
        }
    }

    bool target_ok = true;
    if (cert.h_mu0_exact) target_ok = *cert.h_mu0_exact >= spec.target_h - tol;

    if (!hyp.closeness_ok || !chain_ok || (cert.h_mu0_exact && !target_ok)) {
        cert.verdict = Verdict::fail;
    } else if (!hyp.generator_declared || usable == 0) {
        cert.verdict = Verdict::inconclusive;
    } else {
        cert.verdict = Verdict::pass;
    }

    if (cert.conclusion_mode == "exact") {
        cert.notes.push_back(
            "exact mode: mu0 has a closed-form per-symbol entropy; the verdict compares it "
            "against the target directly.");
    } else {
        cert.notes.push_back(
            "finite-evidence mode: the verdict certifies the verified finite-stage facts "
            "(closeness at each depth and the entropy-comparison chain); the target bound on "
            "the per-symbol entropy of mu0 is a limit statement that these facts support but "
            "do not by themselves prove.");
    }
    cert.notes.push_back(
        "the generator property of the time-zero partition is a declared assumption; it is "
        "recorded, not verified, and is needed to read stage rates as per-symbol entropies.");
    for (const auto& stage : work.stages) {
        if (stage.mun.kind() == MeasureKind::lumped) {
            cert.notes.push_back(
                "lumped stage measures have no closed-form per-symbol entropy; stage rates use "
                "the rigorous upper bound H_r / r.");
            break;
        }
    }
    if (spec.coarsen_m)
        cert.notes.push_back("stage checks run on the coarsened partition with " +
                             std::to_string(*spec.coarsen_m) +
                             " atoms (remaining symbols merged into TAIL); the closed form, "
                             "when present, still refers to the original mu0.");
    if (!hyp.limits_ok)
        cert.notes.push_back(
            "schedule warnings: the finite surrogates for r_n -> infinity / eps_n -> 0 are "
            "not monotone; the certificate remains a record of the per-stage facts.");
    return cert;
}

/// (1/r) H_r of each stage measure under the m-atom coarsened partition,
/// for each requested m. m = 1 is the trivial partition (zero entropy);
/// m = alphabet size leaves the measure unchanged.
struct RemarkGrid {
    std::vector<std::size_t> m_values;
    std::size_t block_len = 0;
    std::vector<std::size_t> stage_indices;          // 1-based
    std::vector<std::vector<double>> values;         // [stage][m index]
};

template <class S>
RemarkGrid remark_grid(const ScenarioSpec<S>& spec, const std::vector<std::size_t>& m_values,
                       std::size_t block_len, const ExecPolicy& policy = {}) {
    if (spec.stages.empty()) throw ValidationError("scenario has no stages");
    if (block_len < 1) throw ValidationError("remark grid needs block length >= 1");
    const std::size_t k = spec.mu0.alphabet_size();
    for (std::size_t m : m_values) remark_keep_count(m, k);  // validates range

    RemarkGrid grid;
    grid.m_values = m_values;
    grid.block_len = block_len;
    for (std::size_t n = 1; n <= spec.stages.size(); ++n) {
        grid.stage_indices.push_back(n);
        std::vector<double> row;
        for (std::size_t m : m_values) {
            if (m == 1) {
                row.push_back(0.0);
                continue;
            }
            Measure<S> coarse = coarsen(spec.stages[n - 1].mun, remark_keep_count(m, k));
            row.push_back(block_entropy(coarse, block_len, spec.budget, policy) /
                          static_cast<double>(block_len));
        }
        grid.values.push_back(std::move(row));
    }
    return grid;
}

}  // namespace kscert
