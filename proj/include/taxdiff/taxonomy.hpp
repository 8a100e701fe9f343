#ifndef TAXDIFF_TAXONOMY_HPP
#define TAXDIFF_TAXONOMY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace taxdiff {

struct TaxNode {
    std::int64_t id = 0;
    std::int64_t parent_id = 0;
    std::string rank;
    std::string name;
};

// Parsed NCBI-style taxonomy. Node ids map to nodes; the root is the node
// whose parent is itself (id 1 by convention).
class TaxonomyTree {
public:
    const TaxNode& node(std::int64_t id) const;
    bool contains(std::int64_t id) const { return nodes_.count(id) != 0; }
    std::size_t size() const { return nodes_.size(); }
    const std::map<std::int64_t, TaxNode>& nodes() const { return nodes_; }

    // root..self, inclusive
    std::vector<std::int64_t> lineage(std::int64_t id) const;

    static TaxonomyTree from_nodes(std::vector<TaxNode> nodes);

private:
    std::map<std::int64_t, TaxNode> nodes_;
    std::int64_t root_ = 0;
};

// NCBI dmp format: fields separated by "\t|\t", lines terminated by "\t|".
// Names are joined on id, preferring the "scientific name" class.
TaxonomyTree parse_taxdump(std::string_view nodes_dmp, std::string_view names_dmp);
TaxonomyTree parse_taxdump_files(const std::string& nodes_path, const std::string& names_path);

// Class label: an integer in [0, num_classes), plus the distinguished null
// label (== num_classes) reserved for classifier-free unconditional work.
struct TaxLabel {
    std::int32_t class_id = 0;
    std::int32_t num_classes = 0;

    bool is_null() const { return class_id == num_classes; }
    static TaxLabel null(std::int32_t num_classes) { return {num_classes, num_classes}; }
    static TaxLabel of(std::int32_t class_id, std::int32_t num_classes) {
        return {class_id, num_classes};
    }
    bool operator==(const TaxLabel&) const = default;
};

// Result of collapsing every lineage at a fixed depth. `class_of` maps each
// original node id to a dense class id; `representatives[c]` is the node id
// whose subtree defines class c.
struct Reclassification {
    std::map<std::int64_t, std::int32_t> class_of;
    std::vector<std::int64_t> representatives;
    std::int32_t num_classes() const { return static_cast<std::int32_t>(representatives.size()); }
};

// Cut every root-rooted lineage at position `layer` (root = position 1);
// lineages shorter than `layer` collapse to their deepest node. Class ids are
// assigned densely by first appearance when iterating node ids in sorted
// order, so the registry is identical across runs.
Reclassification reclassify(const TaxonomyTree& tree, int layer = 9);

struct SequenceTaxRecord {
    std::string id;
    std::int64_t tax_id = 0;
};

struct LabeledIds {
    // record id -> class id, in input order
    std::vector<std::pair<std::string, std::int32_t>> labels;
    std::size_t dropped = 0;  // records whose tax id had no class
};

LabeledIds assign_labels(const std::vector<SequenceTaxRecord>& records,
                         const Reclassification& mapping);

struct ClassStats {
    std::map<std::int32_t, std::size_t> counts;
    std::map<std::int32_t, double> fractions;
    std::size_t total = 0;
};

ClassStats class_stats(const std::vector<std::int32_t>& labels);

// map.tsv persistence: "# layer=<n> classes=<C>" comment header, then
// original_id <TAB> class_id rows. The registry file lists one
// class_id <TAB> representative_node_id <TAB> name row per class.
void write_taxmap(const std::string& path, const Reclassification& rc, int layer);
void write_class_registry(const std::string& path, const Reclassification& rc,
                          const TaxonomyTree& tree);
struct TaxMap {
    std::map<std::int64_t, std::int32_t> class_of;
    std::int32_t num_classes = 0;
    int layer = 0;
};
TaxMap read_taxmap(const std::string& path);

}  // namespace taxdiff

#endif
