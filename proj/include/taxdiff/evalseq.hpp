#ifndef TAXDIFF_EVALSEQ_HPP
#define TAXDIFF_EVALSEQ_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "taxdiff/fasta.hpp"

namespace taxdiff {

// "key=value" tokens in a FASTA header (whitespace-separated)
std::map<std::string, std::string> header_attrs(const std::string& header);

bool contains_motif(const std::string& seq, const std::string& motif);

// class id -> defining motif, from a "class<TAB>motif" TSV
struct MotifSpec {
    std::map<std::int32_t, std::string> motif_of;
};
MotifSpec read_motif_spec(const std::string& path);
void write_motif_spec(const MotifSpec& spec, const std::string& path);

// Laplace-smoothed canonical residue distribution (20 bins, +1 pseudo-count).
std::array<double, 20> residue_frequencies(const std::vector<std::string>& seqs);

// KL(p || q) in nats; both inputs must come from residue_frequencies so the
// smoothing matches and identical corpora give exactly zero.
double freq_kl(const std::array<double, 20>& p, const std::array<double, 20>& q);

struct EvalReport {
    std::size_t total = 0;     // records incl. rejected ones
    std::size_t valid = 0;     // parseable residues and length >= 10
    double validity_rate = 0.0;
    std::map<int, std::size_t> length_hist;  // over valid sequences
    bool has_freq_kl = false;
    double freq_kl = 0.0;  // vs reference corpus when one is supplied
    // per class: fraction of samples with that tax= attribute containing the
    // class motif, and the same motif's rate over tax=null samples
    std::map<std::int32_t, double> cond_motif_rate;
    std::map<std::int32_t, double> uncond_motif_rate;
    std::map<std::string, std::size_t> group_counts;  // by tax= attribute
};

EvalReport evaluate_sequences(const LenientFasta& generated,
                              const std::vector<std::string>& reference_seqs,
                              const MotifSpec* motifs);

}  // namespace taxdiff

#endif
