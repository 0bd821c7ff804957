#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kscert/certifier.hpp"
#include "kscert/comparison.hpp"
#include "kscert/measure.hpp"

namespace kscert {

/// Markov measure with transition matrix (1-t) P + t Q and its stationary
/// distribution. t = 0 returns the base unchanged; the blended chain must
/// be irreducible.
template <class S>
Measure<S> perturb(const Measure<S>& base, const Matrix<S>& Q, const S& t) {
    if (base.kind() != MeasureKind::markov)
        throw ValidationError("perturb needs a Markov base measure");
    if (t < S(0) || t > S(1)) throw ValidationError("perturbation size t must lie in [0,1]");
    if (t == S(0)) return base;
    const auto& P = base.transition();
    if (Q.size() != P.size())
        throw ValidationError("direction matrix dimension does not match the base chain");
    detail::check_row_stochastic(Q);

    const std::size_t k = P.size();
    Matrix<S> blend(k, std::vector<S>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            blend[i][j] = (S(1) - t) * P[i][j] + t * Q[i][j];
    if (communicating_classes(blend).size() != 1)
        throw ValidationError("perturbed chain is reducible");
    return Measure<S>::markov(std::move(blend), std::nullopt, base.alphabet());
}

/// A controlled family mu_n = perturb(base, Q, t_n) with t_n decreasing to
/// zero and depths r_n increasing.
template <class S>
struct PerturbationFamily {
    Measure<S> base;
    Matrix<S> direction;
    std::vector<S> schedule;                 // t_n, strictly decreasing, positive
    std::vector<std::size_t> depth_schedule; // r_n, strictly increasing
};

/// Default schedules: t_n = t0 * 2^-(n-1), r_n = r0 + (n-1).
template <class S>
PerturbationFamily<S> geometric_family(Measure<S> base, Matrix<S> direction, const S& t0,
                                       std::size_t r0, std::size_t count) {
    if (!(t0 > S(0)) || t0 > S(1))
        throw ValidationError("schedule start t0 must lie in (0,1]");
    if (r0 < 1) throw ValidationError("depth schedule must start at r0 >= 1");
    PerturbationFamily<S> family{std::move(base), std::move(direction), {}, {}};
    S t = t0;
    for (std::size_t n = 0; n < count; ++n) {
        family.schedule.push_back(t);
        family.depth_schedule.push_back(r0 + n);
        t = t / S(2);
    }
    return family;
}

/// How the declared eps_n of a generated scenario relates to the computed
/// eps*: adopted verbatim, or inflated by a relative margin to leave slack.
struct EpsPolicy {
    std::optional<double> margin;  // eps_n = eps* (1 + margin); absent = exact
};

template <class S>
void validate_family(const PerturbationFamily<S>& family, std::size_t stages) {
    if (stages < 1) throw ValidationError("scenario needs at least one stage");
    if (stages > family.schedule.size() || stages > family.depth_schedule.size())
        throw ValidationError("requested " + std::to_string(stages) +
                              " stages but the schedule has only " +
                              std::to_string(std::min(family.schedule.size(),
                                                      family.depth_schedule.size())) +
                              " entries");
    for (std::size_t i = 0; i < stages; ++i) {
        if (!(family.schedule[i] > S(0)))
            throw ValidationError("schedule t_n must stay positive");
        if (i > 0 && !(family.schedule[i] < family.schedule[i - 1]))
            throw ValidationError("schedule t_n must be strictly decreasing");
        if (i > 0 && family.depth_schedule[i] <= family.depth_schedule[i - 1])
            throw ValidationError("depth schedule r_n must be strictly increasing");
    }
}

/// Builds a scenario whose stages are perturbations of the base with
/// computed (or margin-inflated) closeness constants. The target defaults
/// to the closed-form entropy of the base, so exact-mode certification of
/// the generated scenario closes the loop.
template <class S>
ScenarioSpec<S> build_scenario(const PerturbationFamily<S>& family, std::size_t stages,
                               const EpsPolicy& policy = {},
                               std::size_t budget = kDefaultBudget,
                               const ExecPolicy& exec = {},
                               std::optional<double> target_override = std::nullopt) {
    validate_family(family, stages);

    ScenarioSpec<S> spec{family.base,
                         {},
                         0.0,
                         {true,
                          "time-zero partition of a full shift on finitely many symbols; it "
                          "separates trajectories by construction"},
                         std::nullopt,
                         budget};

    for (std::size_t n = 0; n < stages; ++n) {
        Stage<S> stage{perturb(family.base, family.direction, family.schedule[n]),
                       family.depth_schedule[n], std::nullopt};
        auto rep = epsilon_star(spec.mu0, stage.mun, stage.r, EpsilonMethod::automatic, budget,
                                exec);
        if (rep.infinite)
            throw ValidationError(
                "stage " + std::to_string(n + 1) +
                ": no finite eps exists (mu0 charges a cylinder that mu_n misses); witness " +
                render_word(*rep.witness_infinite, spec.mu0.alphabet()));
        if (rep.ratio_min == S(0))
            throw ValidationError(
                "stage " + std::to_string(n + 1) +
                ": mu_n charges a cylinder outside the support of mu0 (witness " +
                render_word(rep.witness_min, spec.mu0.alphabet()) +
                "), so eps* >= 1 at every depth and the stage can never become usable");
        S eps = rep.c_star;
        if (policy.margin) {
            if (*policy.margin < 0.0) throw ValidationError("eps margin must be nonnegative");
            if constexpr (is_exact_scalar_v<S>)
                eps = eps * (Rational(1) + rational_from_double_literal(*policy.margin));
            else
                eps = eps * (1.0 + *policy.margin);
        }
        stage.eps = eps;
        spec.stages.push_back(std::move(stage));
    }

    if (target_override) {
        spec.target_h = *target_override;
    } else {
        auto closed = ks_entropy_closed_form(spec.mu0);
        spec.target_h = closed ? *closed : 0.0;
    }
    return spec;
}

}  // namespace kscert
