#include "taxdiff/evalseq.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "taxdiff/alphabet.hpp"
#include "taxdiff/errors.hpp"

namespace taxdiff {

std::map<std::string, std::string> header_attrs(const std::string& header) {
    std::map<std::string, std::string> out;
    std::istringstream is(header);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos && eq > 0)
            out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

bool contains_motif(const std::string& seq, const std::string& motif) {
    return !motif.empty() && seq.find(motif) != std::string::npos;
}

MotifSpec read_motif_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoFailure("cannot read '" + path + "'");
    MotifSpec spec;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw MalformedDump("motif spec line " + std::to_string(lineno) + " has no tab");
        try {
            spec.motif_of[static_cast<std::int32_t>(std::stol(line.substr(0, tab)))] =
                line.substr(tab + 1);
        } catch (const std::exception&) {
            throw MalformedDump("motif spec line " + std::to_string(lineno) +
                                " has a non-numeric class id");
        }
    }
    return spec;
}

void write_motif_spec(const MotifSpec& spec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoFailure("cannot write '" + path + "'");
    for (const auto& [cls, motif] : spec.motif_of) os << cls << '\t' << motif << '\n';
}

std::array<double, 20> residue_frequencies(const std::vector<std::string>& seqs) {
    std::array<double, 20> counts;
    counts.fill(1.0);  // pseudo-count
    for (const std::string& s : seqs)
        for (const char ch : s)
            if (const auto idx = alphabet::residue_index(ch);
                idx && *idx < alphabet::kNumResidues)
                counts[static_cast<std::size_t>(*idx)] += 1.0;
    double total = 0.0;
    for (const double c : counts) total += c;
    for (double& c : counts) c /= total;
    return counts;
}

double freq_kl(const std::array<double, 20>& p, const std::array<double, 20>& q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != q[i]) kl += p[i] * std::log(p[i] / q[i]);
    return kl;
}

EvalReport evaluate_sequences(const LenientFasta& generated,
                              const std::vector<std::string>& reference_seqs,
                              const MotifSpec* motifs) {
    EvalReport rep;
    rep.total = generated.records.size() + generated.rejected.size();

    std::vector<std::string> valid_seqs;
    for (const FastaRecord& r : generated.records) {
        if (r.seq.length() < 10) continue;
        ++rep.valid;
        ++rep.length_hist[static_cast<int>(r.seq.length())];
        valid_seqs.push_back(r.seq.to_string());
    }
    rep.validity_rate = rep.total == 0 ? 0.0
                                       : static_cast<double>(rep.valid) /
                                             static_cast<double>(rep.total);

    if (!reference_seqs.empty()) {
        rep.has_freq_kl = true;
        rep.freq_kl = freq_kl(residue_frequencies(valid_seqs),
                              residue_frequencies(reference_seqs));
    }

    // Grouping and motif rates run over valid sequences only, so sampler
    // rejects never dilute the conditional-enrichment signal.
    for (const FastaRecord& r : generated.records) {
        if (r.seq.length() < 10) continue;
        const auto attrs = header_attrs(r.id);
        const auto it = attrs.find("tax");
        if (it != attrs.end()) ++rep.group_counts[it->second];
    }

    if (motifs) {
        for (const auto& [cls, motif] : motifs->motif_of) {
            const std::string want = std::to_string(cls);
            std::size_t n_cond = 0, hit_cond = 0, n_null = 0, hit_null = 0;
            for (const FastaRecord& r : generated.records) {
                if (r.seq.length() < 10) continue;
                const auto attrs = header_attrs(r.id);
                const auto it = attrs.find("tax");
                if (it == attrs.end()) continue;
                if (it->second == want) {
                    ++n_cond;
                    if (contains_motif(r.seq.to_string(), motif)) ++hit_cond;
                } else if (it->second == "null") {
                    ++n_null;
                    if (contains_motif(r.seq.to_string(), motif)) ++hit_null;
                }
            }
            if (n_cond > 0)
                rep.cond_motif_rate[cls] =
                    static_cast<double>(hit_cond) / static_cast<double>(n_cond);
            if (n_null > 0)
                rep.uncond_motif_rate[cls] =
                    static_cast<double>(hit_null) / static_cast<double>(n_null);
        }
    }
    return rep;
}

}  // namespace taxdiff
