#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "kscert/enumerate.hpp"
#include "kscert/measure.hpp"
#include "kscert/numeric.hpp"

namespace kscert {

/// phi(t) = -t ln t, with phi(0) = 0. Natural log throughout.
inline double phi(double t) {
    if (t < 0.0) throw ValidationError("phi(t) requires t >= 0");
    if (t == 0.0) return 0.0;
    return -t * std::log(t);
}

/// Shannon entropy in nats: sum of phi over the entries. Zero entries
/// contribute nothing. Entries are converted to double before the log;
/// summation is compensated and runs in index order.
template <class S>
double shannon_entropy(const ProbVector<S>& p) {
    NeumaierSum sum;
    for (std::size_t i = 0; i < p.size(); ++i) sum.add(phi(to_double(p[i])));
    return sum.value();
}

/// Entropy of the length-`len` cylinder distribution. Serial reference:
/// one lexicographic pass, compensated summation. Kept alongside the
/// sharded kernel so tests and the benchmark can compare them.
template <class S>
double block_entropy_serial(const Measure<S>& mu, std::size_t len, std::size_t budget = kDefaultBudget) {
    if (len == 0) return 0.0;
    checked_word_count(mu.alphabet_size(), len, budget);
    NeumaierSum sum;
    for_each_word(mu, len, [&](const std::vector<Symbol>&, const S& prob) {
        sum.add(phi(to_double(prob)));
    });
    return sum.value();
}

/// Sharded block entropy: each shard of the fixed plan accumulates its
/// words with compensated summation, shard partials are combined in shard
/// order. Shards run on OpenMP threads; the result does not depend on the
/// thread count.
template <class S>
double block_entropy(const Measure<S>& mu, std::size_t len, std::size_t budget = kDefaultBudget,
                     const ExecPolicy& policy = {}) {
    if (len == 0) return 0.0;
    checked_word_count(mu.alphabet_size(), len, budget);
    ShardPlan plan = make_shard_plan(mu.alphabet_size(), len);
    auto partials = run_shards<double>(plan, policy, [&](std::size_t shard) {
        NeumaierSum sum;
        for_each_word_with_prefix(mu, plan.prefix_of(shard), len,
                                  [&](const std::vector<Symbol>&, const S& prob) {
                                      sum.add(phi(to_double(prob)));
                                  });
        return sum.value();
    });
    NeumaierSum total;
    for (double part : partials) total.add(part);
    return total.value();
}

/// Exact per-symbol entropy where the model family admits one:
/// Bernoulli -> H(weights); Markov -> -sum_i pi_i sum_j P_ij ln P_ij;
/// lumped measures have no closed form in general.
template <class S>
std::optional<double> ks_entropy_closed_form(const Measure<S>& mu) {
    switch (mu.kind()) {
        case MeasureKind::bernoulli:
            return shannon_entropy(ProbVector<S>(mu.weights()));
        case MeasureKind::markov: {
            NeumaierSum sum;
            const auto& P = mu.transition();
            for (std::size_t i = 0; i < P.size(); ++i) {
                const double pi_i = to_double(mu.initial()[i]);
                for (std::size_t j = 0; j < P.size(); ++j)
                    sum.add(pi_i * phi(to_double(P[i][j])));
            }
            return sum.value();
        }
        case MeasureKind::lumped:
            return std::nullopt;
    }
    return std::nullopt;
}

/// Block entropies H_r for r = 1..R, their averages H_r/r (the
/// non-increasing sequence whose limit is the per-symbol entropy), and
/// increments H_{r+1} - H_r.
struct EntropyReport {
    std::vector<double> block_entropies;  // H_1..H_R
    std::vector<double> averages;         // H_r / r
    std::vector<double> increments;       // H_{r+1} - H_r, size R-1
    std::optional<double> ks_exact;
};

template <class S>
EntropyReport entropy_rate_profile(const Measure<S>& mu, std::size_t max_len,
                                   std::size_t budget = kDefaultBudget,
                                   const ExecPolicy& policy = {}) {
    if (max_len == 0) throw ValidationError("entropy profile needs max depth >= 1");
    checked_word_count(mu.alphabet_size(), max_len, budget);
    EntropyReport report;
    for (std::size_t r = 1; r <= max_len; ++r)
        report.block_entropies.push_back(block_entropy(mu, r, budget, policy));
    for (std::size_t r = 1; r <= max_len; ++r)
        report.averages.push_back(report.block_entropies[r - 1] / static_cast<double>(r));
    for (std::size_t r = 1; r < max_len; ++r)
        report.increments.push_back(report.block_entropies[r] - report.block_entropies[r - 1]);
    report.ks_exact = ks_entropy_closed_form(mu);
    return report;
}

}  // namespace kscert
