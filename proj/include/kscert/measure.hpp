#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kscert/alphabet.hpp"
#include "kscert/errors.hpp"
#include "kscert/rational.hpp"

namespace kscert {

/// Absolute per-entry tolerance for stochasticity/stationarity of float
/// inputs. Exact mode admits no slack: rational inputs must satisfy the
/// constraints exactly.
inline constexpr double kInputTolerance = 1e-10;

template <class S>
using Matrix = std::vector<std::vector<S>>;

namespace detail {

template <class S>
bool entry_close(const S& value, const S& target) {
    if constexpr (is_exact_scalar_v<S>) {
        return value == target;
    } else {
        return std::abs(value - target) <= kInputTolerance;
    }
}

template <class S>
const char* mode_hint() {
    if constexpr (is_exact_scalar_v<S>)
        return " (exact mode: give entries as fractions, e.g. \"9/10\", or use float mode)";
    else
        return "";
}

}  // namespace detail

/// Finite nonnegative vector summing to one.
template <class S>
class ProbVector {
public:
    explicit ProbVector(std::vector<S> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw ValidationError("probability vector is empty");
        S sum{};
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            if (weights_[i] < S(0))
                throw ValidationError("probability vector entry " + std::to_string(i) +
                                      " is negative");
            sum += weights_[i];
        }
        bool ok;
        if constexpr (is_exact_scalar_v<S>)
            ok = sum == S(1);
        else
            ok = std::abs(to_double(sum) - 1.0) <= 1e-12;
        if (!ok)
            throw ValidationError(std::string("probability vector does not sum to 1") +
                                  detail::mode_hint<S>());
    }

    std::size_t size() const { return weights_.size(); }
    const S& operator[](std::size_t i) const { return weights_[i]; }
    const std::vector<S>& weights() const { return weights_; }

private:
    std::vector<S> weights_;
};

/// Communicating classes of the support graph of a square nonnegative
/// matrix (edge i->j iff P[i][j] > 0), in deterministic order.
template <class S>
std::vector<std::vector<std::size_t>> communicating_classes(const Matrix<S>& P) {
    const std::size_t n = P.size();
    // Tarjan, iterative.
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> classes;
    int next_index = 0;

    struct Frame {
        std::size_t v;
        std::size_t next_child;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            bool descended = false;
            while (f.next_child < n) {
                std::size_t w = f.next_child++;
                if (!(P[f.v][w] > S(0))) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
            }
            if (descended) continue;
            if (low[f.v] == index[f.v]) {
                std::vector<std::size_t> comp;
                for (;;) {
                    std::size_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                    if (w == f.v) break;
                }
                std::sort(comp.begin(), comp.end());
                classes.push_back(std::move(comp));
            }
            std::size_t finished = f.v;
            frames.pop_back();
            if (!frames.empty())
                low[frames.back().v] = std::min(low[frames.back().v], low[finished]);
        }
    }
    std::sort(classes.begin(), classes.end());
    return classes;
}

namespace detail {

template <class S>
bool class_is_closed(const Matrix<S>& P, const std::vector<std::size_t>& cls) {
    std::vector<bool> member(P.size(), false);
    for (auto i : cls) member[i] = true;
    for (auto i : cls)
        for (std::size_t j = 0; j < P.size(); ++j)
            if (P[i][j] > S(0) && !member[j]) return false;
    return true;
}

template <class S>
std::string describe_classes(const std::vector<std::vector<std::size_t>>& classes) {
    std::string out;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        out += c == 0 ? "{" : ", {";
        for (std::size_t i = 0; i < classes[c].size(); ++i) {
            if (i > 0) out += ",";
            out += std::to_string(classes[c][i]);
        }
        out += "}";
    }
    return out;
}

template <class S>
void check_row_stochastic(const Matrix<S>& P) {
    const std::size_t n = P.size();
    if (n < 2) throw ValidationError("transition matrix needs dimension >= 2");
    for (std::size_t i = 0; i < n; ++i) {
        if (P[i].size() != n)
            throw ValidationError("transition matrix row " + std::to_string(i) +
                                  " has wrong length");
        S sum{};
        for (std::size_t j = 0; j < n; ++j) {
            if (P[i][j] < S(0))
                throw ValidationError("transition matrix entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") is negative");
            sum += P[i][j];
        }
        if (!entry_close(sum, S(1)))
            throw ValidationError("transition matrix row " + std::to_string(i) +
                                  " does not sum to 1" + mode_hint<S>());
    }
}

// Solves A x = b by Gaussian elimination. Exact scalars pivot on the first
// nonzero entry; floats use partial pivoting. Deterministic either way.
template <class S>
std::vector<S> solve_linear(Matrix<S> A, std::vector<S> b) {
    const std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        if constexpr (is_exact_scalar_v<S>) {
            while (pivot < n && A[pivot][col] == S(0)) ++pivot;
            if (pivot == n) throw ValidationError("singular linear system");
        } else {
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
            if (A[pivot][col] == S(0)) throw ValidationError("singular linear system");
        }
        std::swap(A[col], A[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || A[r][col] == S(0)) continue;
            S factor = A[r][col] / A[col][col];
            for (std::size_t c = col; c < n; ++c) A[r][c] -= factor * A[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<S> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return x;
}

}  // namespace detail

/// Stationary distribution of a row-stochastic matrix. Requires a unique
/// closed communicating class; with several closed classes the stationary
/// distribution is not unique and the classes are reported in the error.
template <class S>
ProbVector<S> stationary_distribution(const Matrix<S>& P) {
    detail::check_row_stochastic(P);
    const std::size_t n = P.size();
    auto classes = communicating_classes(P);
    std::vector<std::vector<std::size_t>> closed;
    for (const auto& cls : classes)
        if (detail::class_is_closed(P, cls)) closed.push_back(cls);
    if (closed.size() != 1)
        throw ValidationError(
            "reducible chain with non-unique stationary distribution; communicating classes: " +
            detail::describe_classes<S>(classes));

    const auto& support = closed.front();
    const std::size_t m = support.size();
    // Solve pi_C (P_C - I) = 0 with the last equation replaced by sum = 1.
    Matrix<S> A(m, std::vector<S>(m));
    std::vector<S> b(m, S(0));
    for (std::size_t row = 0; row + 1 < m; ++row)
        for (std::size_t colv = 0; colv < m; ++colv) {
            A[row][colv] = P[support[colv]][support[row]];
            if (row == colv) A[row][colv] -= S(1);
        }
    for (std::size_t colv = 0; colv < m; ++colv) A[m - 1][colv] = S(1);
    b[m - 1] = S(1);
    auto x = detail::solve_linear(std::move(A), std::move(b));

    std::vector<S> pi(n, S(0));
    for (std::size_t idx = 0; idx < m; ++idx) pi[support[idx]] = x[idx];
    if constexpr (!is_exact_scalar_v<S>) {
        // Scrub solver noise so the result is a valid distribution.
        double total = 0.0;
        for (auto& v : pi) {
            if (v < 0.0 && v > -1e-12) v = 0.0;
            total += v;
        }
        for (auto& v : pi) v /= total;
    }
    return ProbVector<S>(std::move(pi));
}

enum class MeasureKind { bernoulli, markov, lumped };

/// A stationary measure on the full shift over a finite alphabet:
/// i.i.d. (Bernoulli), one-step Markov, or the image of a Markov measure
/// under a symbol-merging map (lumped).
template <class S>
class Measure {
public:
    static Measure bernoulli(ProbVector<S> weights,
                             std::optional<Alphabet> alphabet = std::nullopt) {
        Measure m(MeasureKind::bernoulli,
                  alphabet ? std::move(*alphabet) : Alphabet::decimal(weights.size()));
        if (m.alphabet_.size() != weights.size())
            throw ValidationError("alphabet size does not match weight count");
        m.weights_ = weights.weights();
        return m;
    }

    /// Markov measure; `pi` defaults to the stationary distribution of `P`.
    /// A supplied `pi` must be stationary for `P` within the input tolerance.
    static Measure markov(Matrix<S> P, std::optional<ProbVector<S>> pi = std::nullopt,
                          std::optional<Alphabet> alphabet = std::nullopt) {
        detail::check_row_stochastic(P);
        std::vector<S> pivec;
        if (pi) {
            if (pi->size() != P.size())
                throw ValidationError("pi length does not match transition matrix dimension");
            for (std::size_t j = 0; j < P.size(); ++j) {
                S acc{};
                for (std::size_t i = 0; i < P.size(); ++i) acc += (*pi)[i] * P[i][j];
                if (!detail::entry_close(acc, (*pi)[j]))
                    throw ValidationError(
                        "pi is not stationary for P (pi*P differs from pi at entry " +
                        std::to_string(j) + ")" + detail::mode_hint<S>());
            }
            pivec = pi->weights();
        } else {
            pivec = stationary_distribution(P).weights();
        }
        Measure m(MeasureKind::markov,
                  alphabet ? std::move(*alphabet) : Alphabet::decimal(P.size()));
        if (m.alphabet_.size() != P.size())
            throw ValidationError("alphabet size does not match transition matrix dimension");
        m.P_ = std::move(P);
        m.pi_ = std::move(pivec);
        return m;
    }

    /// Image of `base` under `map` (base symbol -> observed symbol).
    /// The map must be total over the base alphabet and surjective onto
    /// the observed alphabet.
    static Measure lumped(Measure base, std::vector<Symbol> map,
                          std::optional<Alphabet> alphabet = std::nullopt) {
        if (base.kind() == MeasureKind::lumped)
            throw ValidationError("lumped base must be a Markov or Bernoulli measure");
        if (base.kind() == MeasureKind::bernoulli) base = base.as_markov();
        if (map.size() != base.alphabet().size())
            throw ValidationError("lump map must assign every base symbol (expected " +
                                  std::to_string(base.alphabet().size()) + " entries, got " +
                                  std::to_string(map.size()) + ")");
        Symbol max_obs = 0;
        for (Symbol target : map) max_obs = std::max(max_obs, target);
        Alphabet obs = alphabet ? std::move(*alphabet)
                                : Alphabet::decimal(static_cast<std::size_t>(max_obs) + 1);
        std::vector<bool> hit(obs.size(), false);
        for (Symbol target : map) {
            if (target >= obs.size())
                throw ValidationError("lump map targets symbol " + std::to_string(target) +
                                      " outside the observed alphabet");
            hit[target] = true;
        }
        std::string unhit;
        for (std::size_t s = 0; s < hit.size(); ++s)
            if (!hit[s]) unhit += (unhit.empty() ? "" : ", ") + obs.label(s);
        if (!unhit.empty())
            throw ValidationError("lump map is not surjective; unhit symbols: " + unhit);

        Measure m(MeasureKind::lumped, std::move(obs));
        m.P_ = std::move(base.P_);
        m.pi_ = std::move(base.pi_);
        m.base_alphabet_ = base.alphabet_;
        m.lump_map_ = std::move(map);
        return m;
    }

    MeasureKind kind() const { return kind_; }
    const Alphabet& alphabet() const { return alphabet_; }
    std::size_t alphabet_size() const { return alphabet_.size(); }

    const std::vector<S>& weights() const { return weights_; }
    const Matrix<S>& transition() const { return P_; }
    const std::vector<S>& initial() const { return pi_; }
    const std::vector<Symbol>& lump_map() const { return lump_map_; }
    const Alphabet& base_alphabet() const { return base_alphabet_; }
    std::size_t base_size() const {
        return kind_ == MeasureKind::lumped ? base_alphabet_.size() : alphabet_.size();
    }

    /// Bernoulli measures viewed as Markov chains with identical rows;
    /// the comparison DP and the lumping code share one code path this way.
    Measure as_markov() const {
        if (kind_ == MeasureKind::markov) return *this;
        if (kind_ != MeasureKind::bernoulli)
            throw UnsupportedMethodError("no Markov form for a lumped measure");
        Matrix<S> P(weights_.size(), weights_);
        Measure m(MeasureKind::markov, alphabet_);
        m.P_ = std::move(P);
        m.pi_ = weights_;
        return m;
    }

private:
    Measure(MeasureKind kind, Alphabet alphabet)
        : kind_(kind), alphabet_(std::move(alphabet)), base_alphabet_(alphabet_) {}

    MeasureKind kind_;
    Alphabet alphabet_;
    std::vector<S> weights_;   // bernoulli
    Matrix<S> P_;              // markov / lumped base
    std::vector<S> pi_;        // markov / lumped base
    Alphabet base_alphabet_;   // lumped
    std::vector<Symbol> lump_map_;
};

/// Incremental prefix-cylinder probability. Pushing symbol s extends the
/// current word; for lumped measures this advances a forward-pass vector
/// over base states, so no preimage enumeration ever happens.
template <class S>
class PrefixWalker {
public:
    explicit PrefixWalker(const Measure<S>& mu, std::size_t max_len)
        : mu_(&mu), kb_(mu.base_size()) {
        probs_.reserve(max_len + 1);
        probs_.push_back(S(1));
        syms_.reserve(max_len);
        if (mu.kind() == MeasureKind::lumped) alpha_.reserve((max_len + 1) * kb_);
    }

    std::size_t depth() const { return syms_.size(); }
    const S& prob() const { return probs_.back(); }

    void push(Symbol s) {
        const Measure<S>& mu = *mu_;
        if (s >= mu.alphabet_size())
            throw ValidationError("symbol index " + std::to_string(s) +
                                  " out of range for alphabet of size " +
                                  std::to_string(mu.alphabet_size()));
        switch (mu.kind()) {
            case MeasureKind::bernoulli:
                probs_.push_back(probs_.back() * mu.weights()[s]);
                break;
            case MeasureKind::markov:
                if (syms_.empty())
                    probs_.push_back(mu.initial()[s]);
                else
                    probs_.push_back(probs_.back() * mu.transition()[syms_.back()][s]);
                break;
            case MeasureKind::lumped: {
                const auto& map = mu.lump_map();
                const std::size_t base = alpha_.size();
                alpha_.resize(base + kb_);
                S total{};
                if (syms_.empty()) {
                    for (std::size_t b = 0; b < kb_; ++b) {
                        alpha_[base + b] = map[b] == s ? mu.initial()[b] : S(0);
                        total += alpha_[base + b];
                    }
                } else {
                    const S* prev = alpha_.data() + base - kb_;
                    for (std::size_t b2 = 0; b2 < kb_; ++b2) {
                        S acc{};
                        if (map[b2] == s) {
                            for (std::size_t b1 = 0; b1 < kb_; ++b1) {
                                if (prev[b1] > S(0)) acc += prev[b1] * mu.transition()[b1][b2];
                            }
                        }
                        alpha_[base + b2] = acc;
                        total += acc;
                    }
                }
                probs_.push_back(std::move(total));
                break;
            }
        }
        syms_.push_back(s);
    }

    void pop() {
        syms_.pop_back();
        probs_.pop_back();
        if (mu_->kind() == MeasureKind::lumped) alpha_.resize(alpha_.size() - kb_);
    }

private:
    const Measure<S>* mu_;
    std::size_t kb_;
    std::vector<S> probs_;
    std::vector<Symbol> syms_;
    std::vector<S> alpha_;
};

/// mu(word) for the cylinder fixing coordinates 0..L-1; the empty word is
/// the whole space.
template <class S>
S cylinder_measure(const Measure<S>& mu, const Word& word) {
    check_word(word, mu.alphabet());
    PrefixWalker<S> walker(mu, word.length());
    for (Symbol s : word.symbols) walker.push(s);
    return walker.prob();
}

/// Merges all symbols with index >= keep into one TAIL symbol.
/// keep == alphabet size returns the measure unchanged.
template <class S>
Measure<S> coarsen(const Measure<S>& mu, std::size_t keep) {
    const std::size_t k = mu.alphabet_size();
    if (keep < 1 || keep > k)
        throw ValidationError("coarsen keep count " + std::to_string(keep) +
                              " out of range 1.." + std::to_string(k));
    if (keep == k) return mu;

    std::vector<std::string> labels(mu.alphabet().labels().begin(),
                                    mu.alphabet().labels().begin() + keep);
    std::string tail = "TAIL";
    while (std::find(labels.begin(), labels.end(), tail) != labels.end()) tail += "_";
    labels.push_back(tail);
    Alphabet coarse(std::move(labels));

    if (mu.kind() == MeasureKind::bernoulli) {
        std::vector<S> w(mu.weights().begin(), mu.weights().begin() + keep);
        S tail_mass{};
        for (std::size_t s = keep; s < k; ++s) tail_mass += mu.weights()[s];
        w.push_back(std::move(tail_mass));
        return Measure<S>::bernoulli(ProbVector<S>(std::move(w)), std::move(coarse));
    }

    const std::size_t kb = mu.base_size();
    std::vector<Symbol> map(kb);
    if (mu.kind() == MeasureKind::markov) {
        for (std::size_t s = 0; s < kb; ++s)
            map[s] = s < keep ? static_cast<Symbol>(s) : static_cast<Symbol>(keep);
        return Measure<S>::lumped(mu, std::move(map), std::move(coarse));
    }
    // Lumped: compose the merge with the existing map; the base chain stays.
    Measure<S> base = Measure<S>::markov(mu.transition(),
                                         ProbVector<S>(mu.initial()),
                                         mu.base_alphabet());
    for (std::size_t s = 0; s < kb; ++s) {
        Symbol obs = mu.lump_map()[s];
        map[s] = obs < keep ? obs : static_cast<Symbol>(keep);
    }
    return Measure<S>::lumped(std::move(base), std::move(map), std::move(coarse));
}

/// lump() under the name the library API uses elsewhere.
template <class S>
Measure<S> lump(const Measure<S>& base, std::vector<Symbol> map,
                std::optional<Alphabet> alphabet = std::nullopt) {
    return Measure<S>::lumped(base, std::move(map), std::move(alphabet));
}

}  // namespace kscert
