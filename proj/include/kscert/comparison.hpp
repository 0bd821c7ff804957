#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "kscert/entropy.hpp"
#include "kscert/enumerate.hpp"
#include "kscert/measure.hpp"

namespace kscert {

inline const double kLn3 = std::log(3.0);

/// Extremes of the ratio mu0(A)/mun(A) over the depth-r cylinder atoms,
/// and the least eps with |mu0(A) - mun(A)| <= eps * mun(A) for all A.
/// c_star is infinite exactly when some atom has mu0 > 0 and mun = 0;
/// atoms where both measures vanish are deemed satisfied and ignored.
template <class S>
struct ComparisonReport {
    std::size_t depth = 0;
    bool infinite = false;
    S c_star{};
    S ratio_max{};
    S ratio_min{};
    Word witness_max;
    Word witness_min;
    std::optional<Word> witness_infinite;

    /// The word that realizes c_star: the support violation when infinite,
    /// otherwise the attaining ratio extreme (ties go to the max side).
    const Word& witness() const {
        if (infinite) return *witness_infinite;
        return (ratio_max - S(1)) >= (S(1) - ratio_min) ? witness_max : witness_min;
    }
};

/// minimal_c over plain probability vectors; witnesses are indices.
template <class S>
struct VectorComparison {
    bool infinite = false;
    S c_star{};
    S ratio_max{};
    S ratio_min{};
    std::size_t witness_max = 0;
    std::size_t witness_min = 0;
    std::optional<std::size_t> witness_infinite;

    std::size_t witness() const {
        if (infinite) return *witness_infinite;
        return (ratio_max - S(1)) >= (S(1) - ratio_min) ? witness_max : witness_min;
    }
};

/// Least c with |p_i - q_i| <= c q_i for all i, via the ratio extremes of
/// p_i/q_i. Convention: 0/0 coordinates are satisfied at any c and skipped;
/// p_i > 0 with q_i = 0 forces c = +infinity.
template <class S>
VectorComparison<S> minimal_c(const ProbVector<S>& p, const ProbVector<S>& q) {
    if (p.size() != q.size())
        throw ValidationError("minimal_c requires vectors of equal length (" +
                              std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
    VectorComparison<S> rep;
    bool any = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] == S(0)) {
            if (p[i] == S(0)) continue;
            if (!rep.infinite) {
                rep.infinite = true;
                rep.witness_infinite = i;
            }
            continue;
        }
        S ratio = p[i] / q[i];
        if (!any) {
            rep.ratio_max = rep.ratio_min = ratio;
            rep.witness_max = rep.witness_min = i;
            any = true;
            continue;
        }
        if (ratio > rep.ratio_max) {
            rep.ratio_max = ratio;
            rep.witness_max = i;
        }
        if (ratio < rep.ratio_min) {
            rep.ratio_min = ratio;
            rep.witness_min = i;
        }
    }
    rep.c_star = std::max(rep.ratio_max - S(1), S(1) - rep.ratio_min);
    return rep;
}

/// (1 + c) * Hq + c * ln 3, the entropy comparison bound. Valid for
/// 0 < c < 1/3; c = 0 degenerates to the equality bound Hq.
inline double lemma1_upper_bound(double entropy_q, double c) {
    if (entropy_q < 0.0) throw ValidationError("entropy must be nonnegative");
    if (c < 0.0) throw ValidationError("closeness constant must be nonnegative");
    if (c == 0.0) return entropy_q;
    if (c >= 1.0 / 3.0)
        throw HypothesisError("closeness constant " + format_float15(c) +
                              " is outside the hypothesis range c < 1/3");
    return (1.0 + c) * entropy_q + c * kLn3;
}

struct Lemma1Verdict {
    bool applicable = false;
    bool holds = false;
    bool c_infinite = false;
    double c_star = 0.0;
    double entropy_p = 0.0;
    double entropy_q = 0.0;
    double bound = 0.0;
    double slack = 0.0;
};

/// Checks H(p) <= (1+c*) H(q) + c* ln 3 whenever c* < 1/3. The gate on
/// c* is exact in rational mode.
template <class S>
Lemma1Verdict check_lemma1(const ProbVector<S>& p, const ProbVector<S>& q, double tol = 1e-9) {
    auto rep = minimal_c(p, q);
    Lemma1Verdict v;
    v.c_infinite = rep.infinite;
    if (rep.infinite) return v;
    v.c_star = to_double(rep.c_star);
    bool in_range;
    if constexpr (is_exact_scalar_v<S>)
        in_range = rep.c_star < Rational(1, 3);
    else
        in_range = rep.c_star < 1.0 / 3.0;
    if (!in_range) return v;
    v.applicable = true;
    v.entropy_p = shannon_entropy(p);
    v.entropy_q = shannon_entropy(q);
    v.bound = lemma1_upper_bound(v.entropy_q, v.c_star);
    v.slack = v.bound - v.entropy_p;
    v.holds = v.slack >= -tol;
    return v;
}

/// The flip step: |a-b| <= eps*b with eps <= 1/2 implies |a-b| <= (2 eps) a.
/// Returns the flipped constant 2*eps.
template <class S>
S flip_epsilon(const S& eps) {
    if (eps < S(0)) throw ValidationError("epsilon must be nonnegative");
    bool ok;
    if constexpr (is_exact_scalar_v<S>)
        ok = eps <= Rational(1, 2);
    else
        ok = eps <= 0.5;
    if (!ok)
        throw HypothesisError("epsilon " + format_float15(to_double(eps)) +
                              " is outside the flip-step hypothesis eps <= 1/2");
    return S(2) * eps;
}

enum class EpsilonMethod { automatic, dp, brute };

namespace detail {

template <class S>
struct ExtremesState {
    bool any = false;
    S ratio_max{};
    S ratio_min{};
    Word witness_max;
    Word witness_min;
    bool infinite = false;
    Word witness_infinite;

    void account(const std::vector<Symbol>& word, const S& p0, const S& p1) {
        if (p1 == S(0)) {
            if (p0 == S(0)) return;  // 0/0 atom: satisfied at any eps
            if (!infinite) {
                infinite = true;
                witness_infinite.symbols = word;
            }
            return;
        }
        S ratio = p0 / p1;
        if (!any) {
            ratio_max = ratio_min = ratio;
            witness_max.symbols = witness_min.symbols = word;
            any = true;
            return;
        }
        if (ratio > ratio_max) {
            ratio_max = ratio;
            witness_max.symbols = word;
        }
        if (ratio < ratio_min) {
            ratio_min = ratio;
            witness_min.symbols = word;
        }
    }

    // Keeps the lexicographically earlier witness on ties: shards are
    // merged in lexicographic order and comparisons stay strict.
    void merge(const ExtremesState& later) {
        if (!infinite && later.infinite) {
            infinite = true;
            witness_infinite = later.witness_infinite;
        }
        if (!later.any) return;
        if (!any) {
            any = true;
            ratio_max = later.ratio_max;
            ratio_min = later.ratio_min;
            witness_max = later.witness_max;
            witness_min = later.witness_min;
            return;
        }
        if (later.ratio_max > ratio_max) {
            ratio_max = later.ratio_max;
            witness_max = later.witness_max;
        }
        if (later.ratio_min < ratio_min) {
            ratio_min = later.ratio_min;
            witness_min = later.witness_min;
        }
    }

    ComparisonReport<S> finish(std::size_t depth) const {
        ComparisonReport<S> rep;
        rep.depth = depth;
        rep.infinite = infinite;
        if (infinite) rep.witness_infinite = witness_infinite;
        if (any) {
            rep.ratio_max = ratio_max;
            rep.ratio_min = ratio_min;
            rep.witness_max = witness_max;
            rep.witness_min = witness_min;
            rep.c_star = std::max(ratio_max - S(1), S(1) - ratio_min);
        }
        return rep;
    }
};

template <class S>
void check_same_alphabet(const Measure<S>& a, const Measure<S>& b) {
    if (!(a.alphabet() == b.alphabet()))
        throw ValidationError("measures live on different alphabets");
}

}  // namespace detail

/// Brute-force epsilon*: one lexicographic scan over all k^(depth+1)
/// atoms. Serial reference implementation.
template <class S>
ComparisonReport<S> epsilon_star_brute_serial(const Measure<S>& mu0, const Measure<S>& mun,
                                              std::size_t depth,
                                              std::size_t budget = kDefaultBudget) {
    detail::check_same_alphabet(mu0, mun);
    const std::size_t len = depth + 1;
    checked_word_count(mu0.alphabet_size(), len, budget);
    detail::ExtremesState<S> state;
    for_each_word_pair_with_prefix(mu0, mun, {}, len,
                                   [&](const std::vector<Symbol>& w, const S& p0, const S& p1) {
                                       state.account(w, p0, p1);
                                   });
    return state.finish(depth);
}

/// Sharded brute-force epsilon*: shards scan disjoint lexicographic blocks
/// on OpenMP threads and are merged in block order, so extremes and
/// witnesses match the serial reference exactly for any thread count.
template <class S>
ComparisonReport<S> epsilon_star_brute(const Measure<S>& mu0, const Measure<S>& mun,
                                       std::size_t depth, std::size_t budget = kDefaultBudget,
                                       const ExecPolicy& policy = {}) {
    detail::check_same_alphabet(mu0, mun);
    const std::size_t len = depth + 1;
    checked_word_count(mu0.alphabet_size(), len, budget);
    ShardPlan plan = make_shard_plan(mu0.alphabet_size(), len);
    auto partials = run_shards<detail::ExtremesState<S>>(plan, policy, [&](std::size_t shard) {
        detail::ExtremesState<S> state;
        for_each_word_pair_with_prefix(mu0, mun, plan.prefix_of(shard), len,
                                       [&](const std::vector<Symbol>& w, const S& p0, const S& p1) {
                                           state.account(w, p0, p1);
                                       });
        return state;
    });
    detail::ExtremesState<S> total;
    for (const auto& part : partials) total.merge(part);
    return total.finish(depth);
}

namespace detail {

// ---- dynamic-programming epsilon* ------------------------------------
//
// For Bernoulli/Markov pairs the atom ratio factors over the transition
// graph:
//   mu0(w)/mun(w) = (pi0[w0]/pin[w0]) * prod_t P0[w_t][w_{t+1}]/Pn[w_t][w_{t+1}]
// so the extremal ratios are extremal path products, found by a Viterbi
// pass in O(k^2 r). Rational mode runs the recursion on exact path
// products; float mode sums log-ratios. Tie-breaking during traceback
// picks the smallest symbol, which yields the lexicographically least
// witness and matches the brute scan exactly in rational mode.

// Path-value helpers: exact products for rationals, log-sums for doubles.
template <class S>
struct PathValue {
    using type = Rational;
    static Rational unit() { return Rational(1); }
    static Rational ratio(const S& a, const S& b) { return Rational(a) / Rational(b); }
    static Rational combine(const Rational& x, const Rational& y) { return x * y; }
    static S to_scalar(const Rational& v) { return v; }
};

template <>
struct PathValue<double> {
    using type = double;
    static double unit() { return 0.0; }
    static double ratio(double a, double b) {
        return (a == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(a)) - std::log(b);
    }
    static double combine(double x, double y) { return x + y; }
    static double to_scalar(double v) { return std::exp(v); }
};

// Lexicographically least word with mu0(w) > 0 and mun(w) = 0, if any.
// State: (position, previous symbol, "a mun-zero factor already seen").
template <class S>
std::optional<Word> least_support_violation(const std::vector<S>& pi0, const Matrix<S>& P0,
                                            const std::vector<S>& pin, const Matrix<S>& Pn,
                                            std::size_t len) {
    const std::size_t k = pi0.size();
    // can[t][s][f]: positions t..len-1 can be filled with P0-positive
    // edges from previous symbol s such that the kill flag ends true.
    std::vector<std::vector<std::array<bool, 2>>> can(
        len + 1, std::vector<std::array<bool, 2>>(k, {false, false}));
    for (std::size_t s = 0; s < k; ++s) can[len][s] = {false, true};
    for (std::size_t t = len; t-- > 1;) {
        for (std::size_t s = 0; s < k; ++s) {
            for (int f = 0; f < 2; ++f) {
                bool ok = false;
                for (std::size_t s2 = 0; s2 < k && !ok; ++s2) {
                    if (!(P0[s][s2] > S(0))) continue;
                    int f2 = f || !(Pn[s][s2] > S(0)) ? 1 : 0;
                    ok = can[t + 1][s2][f2];
                }
                can[t][s][f] = ok;
            }
        }
    }
    Word w;
    for (std::size_t s0 = 0; s0 < k; ++s0) {
        if (!(pi0[s0] > S(0))) continue;
        int f0 = pin[s0] > S(0) ? 0 : 1;
        if (!can[1][s0][f0]) continue;
        w.symbols.push_back(static_cast<Symbol>(s0));
        int f = f0;
        for (std::size_t t = 1; t < len; ++t) {
            std::size_t prev = w.symbols.back();
            for (std::size_t s2 = 0; s2 < k; ++s2) {
                if (!(P0[prev][s2] > S(0))) continue;
                int f2 = f || !(Pn[prev][s2] > S(0)) ? 1 : 0;
                if (can[t + 1][s2][f2]) {
                    w.symbols.push_back(static_cast<Symbol>(s2));
                    f = f2;
                    break;
                }
            }
        }
        return w;
    }
    return std::nullopt;
}

}  // namespace detail

/// epsilon* by dynamic programming over the transition graph. Requires
/// both measures Bernoulli or both Markov on the same alphabet; lumped or
/// mixed pairs must use the brute scan.
template <class S>
ComparisonReport<S> epsilon_star_dp(const Measure<S>& mu0, const Measure<S>& mun,
                                    std::size_t depth) {
    detail::check_same_alphabet(mu0, mun);
    const bool both_bernoulli = mu0.kind() == MeasureKind::bernoulli &&
                                mun.kind() == MeasureKind::bernoulli;
    const bool both_markov = mu0.kind() == MeasureKind::markov &&
                             mun.kind() == MeasureKind::markov;
    if (!both_bernoulli && !both_markov)
        throw UnsupportedMethodError(
            "dp epsilon* needs a Bernoulli/Bernoulli or Markov/Markov pair; use brute");

    const Measure<S> m0 = mu0.as_markov();
    const Measure<S> mn = mun.as_markov();
    const auto& pi0 = m0.initial();
    const auto& P0 = m0.transition();
    const auto& pin = mn.initial();
    const auto& Pn = mn.transition();
    const std::size_t k = pi0.size();
    const std::size_t len = depth + 1;

    using PV = detail::PathValue<S>;
    using V = typename PV::type;

    ComparisonReport<S> rep;
    rep.depth = depth;
    if (auto violation = detail::least_support_violation(pi0, P0, pin, Pn, len)) {
        rep.infinite = true;
        rep.witness_infinite = std::move(*violation);
    }

    // Edge values over the mun-positive graph. P0 zeros give ratio zero
    // (-inf in log space), which the min recursion propagates naturally.
    std::vector<std::vector<std::optional<V>>> edge(k, std::vector<std::optional<V>>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (Pn[i][j] > S(0)) edge[i][j] = PV::ratio(P0[i][j], Pn[i][j]);

    // gmax[s] / gmin[s]: extremal products over `edges` remaining steps
    // starting from s; rebuilt level by level, with history kept for the
    // traceback.
    std::vector<std::vector<V>> gmax(depth + 1, std::vector<V>(k, PV::unit()));
    std::vector<std::vector<V>> gmin(depth + 1, std::vector<V>(k, PV::unit()));
    for (std::size_t edges = 1; edges <= depth; ++edges) {
        for (std::size_t s = 0; s < k; ++s) {
            bool first = true;
            V best_max{}, best_min{};
            for (std::size_t s2 = 0; s2 < k; ++s2) {
                if (!edge[s][s2]) continue;
                V vmax = PV::combine(*edge[s][s2], gmax[edges - 1][s2]);
                V vmin = PV::combine(*edge[s][s2], gmin[edges - 1][s2]);
                if (first) {
                    best_max = vmax;
                    best_min = vmin;
                    first = false;
                } else {
                    if (vmax > best_max) best_max = vmax;
                    if (vmin < best_min) best_min = vmin;
                }
            }
            gmax[edges][s] = best_max;
            gmin[edges][s] = best_min;
        }
    }

    auto traceback = [&](bool maximize) -> std::pair<V, Word> {
        const auto& g = maximize ? gmax : gmin;
        bool first = true;
        V best{};
        std::size_t state = 0;
        for (std::size_t s = 0; s < k; ++s) {
            if (!(pin[s] > S(0))) continue;
            V v = PV::combine(PV::ratio(pi0[s], pin[s]), g[depth][s]);
            if (first || (maximize ? v > best : v < best)) {
                best = v;
                state = s;
                first = false;
            }
        }
        Word w;
        w.symbols.push_back(static_cast<Symbol>(state));
        for (std::size_t edges = depth; edges >= 1; --edges) {
            for (std::size_t s2 = 0; s2 < k; ++s2) {
                if (!edge[state][s2]) continue;
                if (PV::combine(*edge[state][s2], g[edges - 1][s2]) == g[edges][state]) {
                    w.symbols.push_back(static_cast<Symbol>(s2));
                    state = s2;
                    break;
                }
            }
        }
        return {best, std::move(w)};
    };

    auto [vmax, wmax] = traceback(true);
    auto [vmin, wmin] = traceback(false);
    rep.ratio_max = PV::to_scalar(vmax);
    rep.ratio_min = PV::to_scalar(vmin);
    rep.witness_max = std::move(wmax);
    rep.witness_min = std::move(wmin);
    rep.c_star = std::max(rep.ratio_max - S(1), S(1) - rep.ratio_min);
    return rep;
}

template <class S>
bool epsilon_star_dp_applicable(const Measure<S>& mu0, const Measure<S>& mun) {
    return (mu0.kind() == MeasureKind::bernoulli && mun.kind() == MeasureKind::bernoulli) ||
           (mu0.kind() == MeasureKind::markov && mun.kind() == MeasureKind::markov);
}

/// Least eps_n making the closeness condition true over all depth-r atoms.
/// `automatic` picks dp for product-form pairs and the brute scan otherwise.
template <class S>
ComparisonReport<S> epsilon_star(const Measure<S>& mu0, const Measure<S>& mun, std::size_t depth,
                                 EpsilonMethod method = EpsilonMethod::automatic,
                                 std::size_t budget = kDefaultBudget,
                                 const ExecPolicy& policy = {}) {
    switch (method) {
        case EpsilonMethod::dp:
            return epsilon_star_dp(mu0, mun, depth);
        case EpsilonMethod::brute:
            return epsilon_star_brute(mu0, mun, depth, budget, policy);
        case EpsilonMethod::automatic:
            if (epsilon_star_dp_applicable(mu0, mun)) return epsilon_star_dp(mu0, mun, depth);
            return epsilon_star_brute(mu0, mun, depth, budget, policy);
    }
    throw ValidationError("unknown epsilon* method");
}

/// Union-of-atoms closeness (the per-atom condition transfers to unions).
template <class S>
struct AggregateReport {
    bool eps_finite = true;
    S eps{};
    S mu_union{};
    S nu_union{};
    bool holds = true;
    bool achieved_infinite = false;
    S achieved{};
};

/// Verifies |mu(B) - nu(B)| <= eps* . nu(B) for B the union of the given
/// depth-r atoms, with eps* evaluated at the same depth.
template <class S>
AggregateReport<S> aggregate_closeness(const Measure<S>& mu, const Measure<S>& nu,
                                       std::size_t depth, const std::vector<Word>& subset,
                                       std::size_t budget = kDefaultBudget,
                                       const ExecPolicy& policy = {}) {
    detail::check_same_alphabet(mu, nu);
    std::set<std::vector<Symbol>> seen;
    for (const auto& w : subset) {
        if (w.length() != depth + 1)
            throw ValidationError("aggregate subset word '" + render_word(w, mu.alphabet()) +
                                  "' does not have length " + std::to_string(depth + 1));
        check_word(w, mu.alphabet());
        if (!seen.insert(w.symbols).second)
            throw ValidationError("duplicate word '" + render_word(w, mu.alphabet()) +
                                  "' in aggregate subset");
    }

    auto eps_rep = epsilon_star(mu, nu, depth, EpsilonMethod::automatic, budget, policy);
    AggregateReport<S> rep;
    rep.eps_finite = !eps_rep.infinite;
    if (rep.eps_finite) rep.eps = eps_rep.c_star;

    S mu_b{}, nu_b{};
    for (const auto& w : subset) {
        mu_b += cylinder_measure(mu, w);
        nu_b += cylinder_measure(nu, w);
    }
    rep.mu_union = mu_b;
    rep.nu_union = nu_b;
    S diff = mu_b >= nu_b ? mu_b - nu_b : nu_b - mu_b;
    if (nu_b == S(0)) {
        rep.achieved_infinite = diff > S(0);
        rep.holds = rep.eps_finite ? diff == S(0) : true;
    } else {
        rep.achieved = diff / nu_b;
        rep.holds = rep.eps_finite ? diff <= rep.eps * nu_b : true;
    }
    return rep;
}

}  // namespace kscert
