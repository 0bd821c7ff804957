#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kscert/measure.hpp"

namespace kscert {

/// Word-count budget for cylinder enumerations (number of words, k^len).
inline constexpr std::size_t kDefaultBudget = std::size_t(1) << 22;

/// Parallel execution request. jobs == 0 means "all hardware threads";
/// results never depend on the value (work is split into a fixed shard
/// plan and reduced in shard order).
struct ExecPolicy {
    int jobs = 0;

    int resolved_jobs() const {
#ifdef _OPENMP
        return jobs > 0 ? jobs : omp_get_max_threads();
#else
        return 1;
#endif
    }
};

namespace detail {

inline std::string pow_string(std::size_t k, std::size_t len) {
    unsigned __int128 count = 1;
    for (std::size_t i = 0; i < len; ++i) {
        count *= k;
        if (count > (static_cast<unsigned __int128>(1) << 100)) return "> 2^100";
    }
    if (count == 0) return "0";
    std::string out;
    while (count > 0) {
        out.insert(out.begin(), static_cast<char>('0' + int(count % 10)));
        count /= 10;
    }
    return out;
}

}  // namespace detail

/// k^len if it fits the budget, else a ResourceError stating the count.
inline std::size_t checked_word_count(std::size_t k, std::size_t len, std::size_t budget) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < len; ++i) {
        if (count > budget / k) {
            throw ResourceError("enumerating " + std::to_string(k) + "^" + std::to_string(len) +
                                " = " + detail::pow_string(k, len) + " words exceeds the budget of " +
                                std::to_string(budget) + " words");
        }
        count *= k;
    }
    return count;
}

/// Fixed partition of the k^len words into contiguous lexicographic blocks
/// sharing a common prefix. The plan depends only on (k, len), never on the
/// thread count, so parallel reductions are reproducible.
struct ShardPlan {
    std::size_t k = 0;
    std::size_t word_len = 0;
    std::size_t prefix_len = 0;
    std::size_t shard_count = 1;

    /// Prefix of shard `idx` (digits of idx, base k, width prefix_len).
    std::vector<Symbol> prefix_of(std::size_t idx) const {
        std::vector<Symbol> prefix(prefix_len);
        for (std::size_t pos = prefix_len; pos-- > 0;) {
            prefix[pos] = static_cast<Symbol>(idx % k);
            idx /= k;
        }
        return prefix;
    }
};

inline ShardPlan make_shard_plan(std::size_t k, std::size_t len, std::size_t target_shards = 256) {
    ShardPlan plan;
    plan.k = k;
    plan.word_len = len;
    while (plan.prefix_len < len && plan.shard_count < target_shards) {
        plan.shard_count *= k;
        ++plan.prefix_len;
    }
    return plan;
}

/// Visits every word of length `len` starting with `prefix` (possibly
/// empty), with its mu-measure, in lexicographic order. `fn(word, prob)`
/// receives a reference to a shared word buffer; copy it if it must
/// outlive the call.
template <class S, class Fn>
void for_each_word_with_prefix(const Measure<S>& mu, const std::vector<Symbol>& prefix,
                               std::size_t len, Fn&& fn) {
    const std::size_t k = mu.alphabet_size();
    PrefixWalker<S> walker(mu, len);
    std::vector<Symbol> word;
    word.reserve(len);
    for (Symbol s : prefix) {
        word.push_back(s);
        walker.push(s);
    }
    auto recurse = [&](auto&& self) -> void {
        if (word.size() == len) {
            fn(word, walker.prob());
            return;
        }
        for (Symbol s = 0; s < k; ++s) {
            word.push_back(s);
            walker.push(s);
            self(self);
            walker.pop();
            word.pop_back();
        }
    };
    recurse(recurse);
}

template <class S, class Fn>
void for_each_word(const Measure<S>& mu, std::size_t len, Fn&& fn) {
    for_each_word_with_prefix(mu, {}, len, std::forward<Fn>(fn));
}

/// Lockstep traversal of two measures on the same alphabet;
/// fn(word, prob_a, prob_b).
template <class S, class Fn>
void for_each_word_pair_with_prefix(const Measure<S>& a, const Measure<S>& b,
                                    const std::vector<Symbol>& prefix, std::size_t len,
                                    Fn&& fn) {
    const std::size_t k = a.alphabet_size();
    PrefixWalker<S> wa(a, len);
    PrefixWalker<S> wb(b, len);
    std::vector<Symbol> word;
    word.reserve(len);
    for (Symbol s : prefix) {
        word.push_back(s);
        wa.push(s);
        wb.push(s);
    }
    auto recurse = [&](auto&& self) -> void {
        if (word.size() == len) {
            fn(word, wa.prob(), wb.prob());
            return;
        }
        for (Symbol s = 0; s < k; ++s) {
            word.push_back(s);
            wa.push(s);
            wb.push(s);
            self(self);
            wa.pop();
            wb.pop();
            word.pop_back();
        }
    };
    recurse(recurse);
}

/// Runs `shard_fn(shard_index)` for every shard of `plan`, in parallel when
/// the policy allows, storing results by shard index. The caller folds the
/// returned vector in order, so output is independent of the thread count.
template <class R, class ShardFn>
std::vector<R> run_shards(const ShardPlan& plan, const ExecPolicy& policy, ShardFn&& shard_fn) {
    std::vector<R> results(plan.shard_count);
    const auto count = static_cast<long long>(plan.shard_count);
#ifdef _OPENMP
    const int jobs = policy.resolved_jobs();
#pragma omp parallel for num_threads(jobs) schedule(dynamic) if (jobs > 1 && count > 1)
#endif
    for (long long i = 0; i < count; ++i) {
        results[static_cast<std::size_t>(i)] = shard_fn(static_cast<std::size_t>(i));
    }
    (void)policy;
    return results;
}

/// All k^(depth+1) cylinder words of depth r (length r+1) with their
/// measures, in lexicographic order. Materializes the stream; kernels use
/// the for_each visitors instead.
template <class S>
std::vector<std::pair<Word, S>> enumerate_cylinders(const Measure<S>& mu, std::size_t depth,
                                                    std::size_t budget = kDefaultBudget) {
    const std::size_t len = depth + 1;
    const std::size_t count = checked_word_count(mu.alphabet_size(), len, budget);
    std::vector<std::pair<Word, S>> out;
    out.reserve(count);
    for_each_word(mu, len, [&](const std::vector<Symbol>& word, const S& prob) {
        out.emplace_back(Word{word}, prob);
    });
    return out;
}

}  // namespace kscert
