#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kscert/errors.hpp"

namespace kscert {

using Symbol = std::uint32_t;

/// Ordered finite symbol set. Label order is fixed and determines the
/// lexicographic enumeration order of cylinder words.
class Alphabet {
public:
    /// Default labels "0", "1", ... for a k-symbol alphabet.
    static Alphabet decimal(std::size_t k);

    explicit Alphabet(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(Symbol s) const { return labels_.at(s); }
    const std::vector<std::string>& labels() const { return labels_; }

    bool operator==(const Alphabet& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
};

/// A cylinder word: the symbols on coordinates 0..L-1. The empty word
/// denotes the whole space; depth is L-1.
struct Word {
    std::vector<Symbol> symbols;

    std::size_t length() const { return symbols.size(); }
    bool operator==(const Word& other) const { return symbols == other.symbols; }
    bool operator<(const Word& other) const { return symbols < other.symbols; }
};

/// Renders a word through its alphabet's labels. Single-character labels
/// are concatenated ("011"); longer labels are dot-joined ("0.TAIL").
std::string render_word(const Word& word, const Alphabet& alphabet);

/// Validates that every symbol of `word` indexes into `alphabet`.
void check_word(const Word& word, const Alphabet& alphabet);

}  // namespace kscert
