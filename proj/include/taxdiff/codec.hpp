#ifndef TAXDIFF_CODEC_HPP
#define TAXDIFF_CODEC_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "taxdiff/alphabet.hpp"
#include "taxdiff/tensor.hpp"

namespace taxdiff {

// A validated residue string. Only canonical residue indices (< 20) inside;
// stop/pad never appear. Length is at least 1; the upper bound is checked
// against L at encode time.
class ProteinSequence {
public:
    static ProteinSequence from_string(std::string_view text);
    static ProteinSequence from_indices(std::vector<std::uint8_t> residues);

    const std::vector<std::uint8_t>& residues() const { return residues_; }
    std::size_t length() const { return residues_.size(); }
    std::string to_string() const;

    bool operator==(const ProteinSequence& other) const { return residues_ == other.residues_; }

private:
    ProteinSequence() = default;
    std::vector<std::uint8_t> residues_;
};

// The continuous diffusion state: an L x D_vocab real matrix.
using EncodedSequence = Matrix;

// One-hot lift into the L x 22 diffusion space: rows 0..len-1 are hot at the
// residue index, row len at stop, the rest at pad. Hot entries equal
// `amplitude`.
EncodedSequence encode(const ProteinSequence& seq, Eigen::Index L = 256, double amplitude = 1.0);

// Row-wise argmax with ties broken toward the lowest token index, truncated
// at the first stop/pad row. Throws DecodesEmpty when row 0 is already
// stop/pad.
ProteinSequence decode(const EncodedSequence& x0);

// Zero-mean shift of an encoded matrix: subtracts amplitude/D from every
// entry. Argmax decoding is unaffected.
void center_encoding(EncodedSequence& x, double amplitude);

}  // namespace taxdiff

#endif
