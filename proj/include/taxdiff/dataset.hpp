#ifndef TAXDIFF_DATASET_HPP
#define TAXDIFF_DATASET_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "taxdiff/fasta.hpp"
#include "taxdiff/training.hpp"

namespace taxdiff {

// Training-ready corpus: records paired with dense class ids, stored on disk
// as <prefix>.fasta + <prefix>.labels.tsv + <prefix>.meta.json.
struct PreparedDataset {
    std::vector<FastaRecord> records;
    std::vector<std::int32_t> class_ids;  // parallel to records
    std::int32_t num_classes = 0;
};

struct PrepareCounts {
    std::size_t kept = 0;
    std::size_t dropped_too_long = 0;
    std::size_t dropped_unlabeled = 0;
    std::size_t dropped_invalid = 0;
};

// Filters records to length <= max_len, joins record -> tax id -> class id,
// keeps input order. Records without a label mapping, or with residues the
// codec rejects, are dropped and counted.
PreparedDataset prepare_dataset(const std::vector<FastaRecord>& records,
                                const std::unordered_map<std::string, std::int64_t>& tax_of_record,
                                const std::unordered_map<std::int64_t, std::int32_t>& class_of,
                                std::int32_t num_classes, int max_len, PrepareCounts& counts);

void save_dataset(const PreparedDataset& ds, const std::string& prefix);
PreparedDataset load_dataset(const std::string& prefix);

// record id -> tax id, one "id<TAB>taxid" line each
std::unordered_map<std::string, std::int64_t> read_record_labels(const std::string& path);

// Encode every record at width L for training.
std::vector<TrainExample> to_examples(const PreparedDataset& ds, int L, double amplitude,
                                      bool center);

// Synthetic conditional corpus: `classes` classes, each marked by a distinct
// 4-residue motif placed at a random position inside otherwise motif-free
// background residues. Lengths are uniform in [20, 40].
struct ToyCorpus {
    PreparedDataset data;
    std::vector<std::string> motifs;  // motifs[c] defines class c
};

ToyCorpus make_toy_corpus(int per_class, std::uint64_t seed, int classes = 3);

}  // namespace taxdiff

#endif
