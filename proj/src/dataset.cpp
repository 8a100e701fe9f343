#include "taxdiff/dataset.hpp"

#include <fstream>
#include <sstream>

#include "taxdiff/codec.hpp"
#include "taxdiff/errors.hpp"
#include <nlohmann/json.hpp>

namespace taxdiff {

using json = nlohmann::json;

PreparedDataset prepare_dataset(const std::vector<FastaRecord>& records,
                                const std::unordered_map<std::string, std::int64_t>& tax_of_record,
                                const std::unordered_map<std::int64_t, std::int32_t>& class_of,
                                std::int32_t num_classes, int max_len, PrepareCounts& counts) {
    PreparedDataset ds;
    ds.num_classes = num_classes;
    counts.kept = 0;
    counts.dropped_too_long = 0;
    counts.dropped_unlabeled = 0;
    // records hold already-validated sequences; the caller counts rejects
    // from lenient parsing in counts.dropped_invalid
    for (const FastaRecord& r : records) {
        if (r.seq.length() > static_cast<std::size_t>(max_len)) {
            ++counts.dropped_too_long;
            continue;
        }
        const auto tax_it = tax_of_record.find(r.id);
        if (tax_it == tax_of_record.end()) {
            ++counts.dropped_unlabeled;
            continue;
        }
        const auto cls_it = class_of.find(tax_it->second);
        if (cls_it == class_of.end()) {
            ++counts.dropped_unlabeled;
            continue;
        }
        ds.records.push_back(r);
        ds.class_ids.push_back(cls_it->second);
        ++counts.kept;
    }
    return ds;
}

void save_dataset(const PreparedDataset& ds, const std::string& prefix) {
    write_fasta_file(prefix + ".fasta", ds.records);

    std::ofstream ls(prefix + ".labels.tsv");
    if (!ls) throw IoFailure("cannot write '" + prefix + ".labels.tsv'");
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        ls << ds.records[i].id << '\t' << ds.class_ids[i] << '\n';

    std::ofstream ms(prefix + ".meta.json");
    if (!ms) throw IoFailure("cannot write '" + prefix + ".meta.json'");
    ms << json{{"count", ds.records.size()}, {"num_classes", ds.num_classes}}.dump(2) << '\n';
}

PreparedDataset load_dataset(const std::string& prefix) {
    PreparedDataset ds;

    std::ifstream ms(prefix + ".meta.json");
    if (!ms) throw IoFailure("cannot read '" + prefix + ".meta.json'");
    json meta;
    try {
        ms >> meta;
        ds.num_classes = meta.at("num_classes").get<std::int32_t>();
    } catch (const json::exception& e) {
        throw MalformedFasta("bad dataset meta: " + std::string(e.what()));
    }

    ds.records = parse_fasta_file(prefix + ".fasta");

    std::ifstream ls(prefix + ".labels.tsv");
    if (!ls) throw IoFailure("cannot read '" + prefix + ".labels.tsv'");
    std::unordered_map<std::string, std::int32_t> cls;
    std::string line;
    while (std::getline(ls, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw MalformedFasta("label line without a tab: '" + line + "'");
        cls[line.substr(0, tab)] =
            static_cast<std::int32_t>(std::stol(line.substr(tab + 1)));
    }
    ds.class_ids.reserve(ds.records.size());
    for (const FastaRecord& r : ds.records) {
        const auto it = cls.find(r.id);
        if (it == cls.end()) throw MalformedFasta("record '" + r.id + "' has no label row");
        if (it->second < 0 || it->second >= ds.num_classes)
            throw MalformedFasta("record '" + r.id + "' has class outside [0, " +
                                 std::to_string(ds.num_classes) + ")");
        ds.class_ids.push_back(it->second);
    }
    return ds;
}

std::unordered_map<std::string, std::int64_t> read_record_labels(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoFailure("cannot read '" + path + "'");
    std::unordered_map<std::string, std::int64_t> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw MalformedDump("label file line " + std::to_string(lineno) + " has no tab");
        try {
            out[line.substr(0, tab)] = std::stoll(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw MalformedDump("label file line " + std::to_string(lineno) +
                                " has a non-numeric tax id");
        }
    }
    return out;
}

std::vector<TrainExample> to_examples(const PreparedDataset& ds, int L, double amplitude,
                                      bool center) {
    std::vector<TrainExample> out;
    out.reserve(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        Matrix x0 = encode(ds.records[i].seq, L, amplitude);
        if (center) center_encoding(x0, amplitude);
        out.push_back({std::move(x0), TaxLabel::of(ds.class_ids[i], ds.num_classes)});
    }
    return out;
}

ToyCorpus make_toy_corpus(int per_class, std::uint64_t seed, int classes) {
    if (classes < 1 || classes > 3) throw InvalidConfig("toy corpus supports 1-3 classes");
    if (per_class < 1) throw InvalidConfig("toy corpus needs at least one sequence per class");
    // Background letters never appear in any motif, so a motif can only occur
    // where it was planted. The background is a fixed position-cyclic
    // template rather than per-position noise: the only variation is length
    // and motif placement, which keeps the corpus learnable by a small model
    // while the class signal still lives entirely in the motif.
    static const std::string kBackground = "ADEGKLNQST";
    static const std::vector<std::string> kMotifs = {"CHYW", "FIMP", "RVWY"};

    ToyCorpus toy;
    toy.motifs.assign(kMotifs.begin(), kMotifs.begin() + classes);
    toy.data.num_classes = classes;
    Rng rng(splitmix64(seed));
    for (int c = 0; c < classes; ++c) {
        const std::string& motif = kMotifs[static_cast<std::size_t>(c)];
        for (int i = 0; i < per_class; ++i) {
            const int len = 20 + static_cast<int>(rng.uniform_int(21));  // [20, 40]
            std::string s(static_cast<std::size_t>(len), 'A');
            for (std::size_t k = 0; k < s.size(); ++k) s[k] = kBackground[k % kBackground.size()];
            const auto at = rng.uniform_int(static_cast<std::uint64_t>(len - 4 + 1));
            s.replace(static_cast<std::size_t>(at), motif.size(), motif);
            toy.data.records.push_back({"toy" + std::to_string(c) + "_" + std::to_string(i),
                                        ProteinSequence::from_string(s)});
            toy.data.class_ids.push_back(c);
        }
    }
    return toy;
}

}  // namespace taxdiff
