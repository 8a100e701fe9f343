#ifndef TAXDIFF_FASTA_HPP
#define TAXDIFF_FASTA_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "taxdiff/codec.hpp"

namespace taxdiff {

struct FastaRecord {
    std::string id;  // full header line after '>'
    ProteinSequence seq;
};

// Strict parser: throws MalformedFasta / InvalidResidue (with the record id).
std::vector<FastaRecord> parse_fasta(std::string_view text);
std::vector<FastaRecord> parse_fasta_file(const std::string& path);

// Lenient variant for evaluation inputs: skips records with invalid residues
// or empty bodies and reports them instead of throwing.
struct LenientFasta {
    std::vector<FastaRecord> records;
    std::vector<std::string> rejected;  // one message per skipped record
};
LenientFasta parse_fasta_lenient(std::string_view text);

// 60-column wrapped output; round-trips through parse_fasta.
std::string write_fasta(const std::vector<FastaRecord>& records);
void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records);

}  // namespace taxdiff

#endif
