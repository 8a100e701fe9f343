#include "taxdiff/codec.hpp"

#include "taxdiff/errors.hpp"

namespace taxdiff {

ProteinSequence ProteinSequence::from_string(std::string_view text) {
    if (text.empty()) throw EmptySequence("protein sequence is empty");
    ProteinSequence seq;
    seq.residues_.reserve(text.size());
    for (char c : text) {
        auto idx = alphabet::residue_index(c);
        if (!idx) throw InvalidResidue(std::string("invalid residue '") + c + "'");
        seq.residues_.push_back(static_cast<std::uint8_t>(*idx));
    }
    return seq;
}

ProteinSequence ProteinSequence::from_indices(std::vector<std::uint8_t> residues) {
    if (residues.empty()) throw EmptySequence("protein sequence is empty");
    for (auto r : residues) {
        if (r >= alphabet::kNumResidues)
            throw InvalidResidue("residue index " + std::to_string(int(r)) + " out of range");
    }
    ProteinSequence seq;
    seq.residues_ = std::move(residues);
    return seq;
}

std::string ProteinSequence::to_string() const {
    std::string s;
    s.reserve(residues_.size());
    for (auto r : residues_) s.push_back(alphabet::token_char(r));
    return s;
}

EncodedSequence encode(const ProteinSequence& seq, Eigen::Index L, double amplitude) {
    if (seq.length() == 0) throw EmptySequence("cannot encode an empty sequence");
    if (amplitude <= 0.0) throw InvalidConfig("amplitude must be positive");
    const auto len = static_cast<Eigen::Index>(seq.length());
    if (len > L - 1)
        throw SequenceTooLong("sequence of length " + std::to_string(len) +
                              " does not fit L=" + std::to_string(L) + " (need length <= L-1)");
    EncodedSequence x = EncodedSequence::Zero(L, alphabet::kVocab);
    for (Eigen::Index i = 0; i < len; ++i) x(i, seq.residues()[static_cast<std::size_t>(i)]) = amplitude;
    x(len, alphabet::kStop) = amplitude;
    for (Eigen::Index i = len + 1; i < L; ++i) x(i, alphabet::kPad) = amplitude;
    return x;
}

ProteinSequence decode(const EncodedSequence& x0) {
    const Eigen::Index L = x0.rows();
    const Eigen::Index D = x0.cols();
    if (D < alphabet::kVocab) throw ShapeMismatch("decode input must have 22 columns");
    std::vector<std::uint8_t> residues;
    residues.reserve(static_cast<std::size_t>(L));
    for (Eigen::Index i = 0; i < L; ++i) {
        int best = 0;
        double best_val = x0(i, 0);
        for (Eigen::Index j = 1; j < D; ++j) {
            // strict > keeps the lowest index on ties
            if (x0(i, j) > best_val) {
                best_val = x0(i, j);
                best = static_cast<int>(j);
            }
        }
        if (best == alphabet::kStop || best == alphabet::kPad) {
            if (i == 0) throw DecodesEmpty("first row decodes to stop/pad");
            return ProteinSequence::from_indices(std::move(residues));
        }
        residues.push_back(static_cast<std::uint8_t>(best));
    }
    return ProteinSequence::from_indices(std::move(residues));
}

void center_encoding(EncodedSequence& x, double amplitude) {
    x.array() -= amplitude / static_cast<double>(alphabet::kVocab);
}

}  // namespace taxdiff
