#ifndef TAXDIFF_ALPHABET_HPP
#define TAXDIFF_ALPHABET_HPP

#include <array>
#include <cstdint>
#include <optional>

namespace taxdiff {

// Generative alphabet: the 20 canonical residues in alphabetical order,
// then the stop marker, then the pad marker. Indices are stable.
namespace alphabet {

inline constexpr int kNumResidues = 20;
inline constexpr int kStop = 20;
inline constexpr int kPad = 21;
inline constexpr int kVocab = 22;

inline constexpr std::array<char, kVocab> kTokens = {
    'A', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'K', 'L',
    'M', 'N', 'P', 'Q', 'R', 'S', 'T', 'V', 'W', 'Y',
    '*',  // stop
    '-',  // pad
};

// Residue character -> index, or nullopt for anything outside the 20
// canonical residues (B, J, O, U, X, Z and non-letters are rejected).
inline std::optional<int> residue_index(char c) {
    for (int i = 0; i < kNumResidues; ++i)
        if (kTokens[static_cast<std::size_t>(i)] == c) return i;
    return std::nullopt;
}

inline char token_char(int index) { return kTokens.at(static_cast<std::size_t>(index)); }

}  // namespace alphabet

}  // namespace taxdiff

#endif
