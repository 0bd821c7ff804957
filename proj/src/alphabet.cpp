#include "kscert/alphabet.hpp"

#include <algorithm>
#include <unordered_set>

namespace kscert {

Alphabet Alphabet::decimal(std::size_t k) {
    std::vector<std::string> labels;
    labels.reserve(k);
    for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(i));
    return Alphabet(std::move(labels));
}

Alphabet::Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2)
        throw ValidationError("alphabet needs at least 2 symbols, got " +
                              std::to_string(labels_.size()));
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
        if (!seen.insert(l).second)
            throw ValidationError("duplicate alphabet label '" + l + "'");
    }
}

std::string render_word(const Word& word, const Alphabet& alphabet) {
    if (word.symbols.empty()) return "<empty>";
    bool single_char = std::all_of(alphabet.labels().begin(), alphabet.labels().end(),
                                   [](const std::string& l) { return l.size() == 1; });
    std::string out;
    for (std::size_t i = 0; i < word.symbols.size(); ++i) {
        if (i > 0 && !single_char) out += '.';
        out += alphabet.label(word.symbols[i]);
    }
    return out;
}

void check_word(const Word& word, const Alphabet& alphabet) {
    for (Symbol s : word.symbols) {
        if (s >= alphabet.size())
            throw ValidationError("symbol index " + std::to_string(s) +
                                  " out of range for alphabet of size " +
                                  std::to_string(alphabet.size()));
    }
}

}  // namespace kscert
