#include "taxdiff/taxonomy.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "taxdiff/errors.hpp"

namespace taxdiff {

namespace {

// Splits one dmp line into fields. Lines end with "\t|"; fields are
// separated by "\t|\t".
std::vector<std::string_view> split_dmp_line(std::string_view line, std::size_t line_no) {
    while (!line.empty() && (line.back() == '\r')) line.remove_suffix(1);
    if (line.size() < 2 || line.substr(line.size() - 2) != "\t|")
        throw MalformedDump("line " + std::to_string(line_no) + ": missing \"\\t|\" terminator");
    line.remove_suffix(2);
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t sep = line.find("\t|\t", pos);
        if (sep == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, sep - pos));
        pos = sep + 3;
    }
    return fields;
}

std::int64_t parse_id(std::string_view field, std::size_t line_no) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || value <= 0)
        throw MalformedDump("line " + std::to_string(line_no) + ": bad id field '" +
                            std::string(field) + "'");
    return value;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            (eol == std::string_view::npos) ? text.substr(pos) : text.substr(pos, eol - pos);
        ++line_no;
        if (!line.empty() && line != "\r") fn(line, line_no);
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
}

}  // namespace

const TaxNode& TaxonomyTree::node(std::int64_t id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownTaxId("unknown tax id " + std::to_string(id));
    return it->second;
}

std::vector<std::int64_t> TaxonomyTree::lineage(std::int64_t id) const {
    std::vector<std::int64_t> path;
    std::int64_t cur = id;
    const std::size_t limit = nodes_.size() + 1;
    while (true) {
        const TaxNode& n = node(cur);
        path.push_back(cur);
        if (n.parent_id == cur) break;  // root
        if (path.size() > limit)
            throw CycleDetected("parent links of tax id " + std::to_string(id) +
                                " do not terminate at a root");
        cur = n.parent_id;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

TaxonomyTree TaxonomyTree::from_nodes(std::vector<TaxNode> nodes) {
    TaxonomyTree tree;
    for (auto& n : nodes) tree.nodes_.emplace(n.id, std::move(n));
    std::vector<std::int64_t> dangling;
    for (const auto& [id, n] : tree.nodes_) {
        if (!tree.nodes_.count(n.parent_id)) dangling.push_back(id);
        if (n.parent_id == id) tree.root_ = id;
    }
    if (!dangling.empty()) {
        std::ostringstream msg;
        msg << "nodes with missing parents:";
        for (auto id : dangling) msg << ' ' << id;
        throw DanglingParent(msg.str());
    }
    if (tree.root_ == 0) throw MalformedDump("no root node (id == parent_id) found");
    // every lineage must terminate; surfaces cycles at parse time
    for (const auto& [id, n] : tree.nodes_) tree.lineage(id);
    return tree;
}

TaxonomyTree parse_taxdump(std::string_view nodes_dmp, std::string_view names_dmp) {
    std::vector<TaxNode> nodes;
    for_each_line(nodes_dmp, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_dmp_line(line, line_no);
        if (fields.size() < 3)
            throw MalformedDump("nodes.dmp line " + std::to_string(line_no) +
                                ": expected at least 3 fields, got " +
                                std::to_string(fields.size()));
        TaxNode n;
        n.id = parse_id(fields[0], line_no);
        n.parent_id = parse_id(fields[1], line_no);
        n.rank = std::string(fields[2]);
        nodes.push_back(std::move(n));
    });
    if (nodes.empty()) throw MalformedDump("nodes.dmp contains no records");

    std::map<std::int64_t, std::string> scientific, fallback;
    for_each_line(names_dmp, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_dmp_line(line, line_no);
        if (fields.size() < 4)
            throw MalformedDump("names.dmp line " + std::to_string(line_no) +
                                ": expected at least 4 fields");
        std::int64_t id = parse_id(fields[0], line_no);
        if (fields[3] == "scientific name")
            scientific[id] = std::string(fields[1]);
        else
            fallback.emplace(id, std::string(fields[1]));
    });
    for (auto& n : nodes) {
        if (auto it = scientific.find(n.id); it != scientific.end())
            n.name = it->second;
        else if (auto fb = fallback.find(n.id); fb != fallback.end())
            n.name = fb->second;
    }
    return TaxonomyTree::from_nodes(std::move(nodes));
}

TaxonomyTree parse_taxdump_files(const std::string& nodes_path, const std::string& names_path) {
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoFailure("cannot open: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    return parse_taxdump(slurp(nodes_path), slurp(names_path));
}

Reclassification reclassify(const TaxonomyTree& tree, int layer) {
    if (layer < 1) throw InvalidConfig("layer must be >= 1");
    Reclassification rc;
    std::map<std::int64_t, std::int32_t> class_of_rep;
    // std::map iteration == sorted id order, which fixes the registry order
    for (const auto& [id, n] : tree.nodes()) {
        auto path = tree.lineage(id);
        const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(layer), path.size());
        const std::int64_t rep = path[cut - 1];
        auto it = class_of_rep.find(rep);
        std::int32_t cls;
        if (it == class_of_rep.end()) {
            cls = static_cast<std::int32_t>(rc.representatives.size());
            class_of_rep.emplace(rep, cls);
            rc.representatives.push_back(rep);
        } else {
            cls = it->second;
        }
        rc.class_of.emplace(id, cls);
    }
    return rc;
}

LabeledIds assign_labels(const std::vector<SequenceTaxRecord>& records,
                         const Reclassification& mapping) {
    LabeledIds out;
    for (const auto& rec : records) {
        auto it = mapping.class_of.find(rec.tax_id);
        if (it == mapping.class_of.end()) {
            ++out.dropped;
            continue;
        }
        out.labels.emplace_back(rec.id, it->second);
    }
    return out;
}

ClassStats class_stats(const std::vector<std::int32_t>& labels) {
    ClassStats stats;
    stats.total = labels.size();
    for (auto c : labels) ++stats.counts[c];
    if (stats.total > 0) {
        for (const auto& [c, n] : stats.counts)
            stats.fractions[c] = static_cast<double>(n) / static_cast<double>(stats.total);
    }
    return stats;
}

void write_taxmap(const std::string& path, const Reclassification& rc, int layer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open for writing: " + path);
    out << "# layer=" << layer << " classes=" << rc.num_classes() << "\n";
    for (const auto& [id, cls] : rc.class_of) out << id << '\t' << cls << '\n';
    if (!out) throw IoFailure("write failed: " + path);
}

void write_class_registry(const std::string& path, const Reclassification& rc,
                          const TaxonomyTree& tree) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open for writing: " + path);
    for (std::size_t c = 0; c < rc.representatives.size(); ++c) {
        const auto rep = rc.representatives[c];
        out << c << '\t' << rep << '\t' << tree.node(rep).name << '\n';
    }
    if (!out) throw IoFailure("write failed: " + path);
}

TaxMap read_taxmap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open: " + path);
    TaxMap map;
    std::string line;
    std::size_t line_no = 0;
    std::int32_t max_class = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hdr(line.substr(1));
            std::string token;
            while (hdr >> token) {
                if (token.rfind("layer=", 0) == 0) map.layer = std::stoi(token.substr(6));
                if (token.rfind("classes=", 0) == 0) map.num_classes = std::stoi(token.substr(8));
            }
            continue;
        }
        std::istringstream row(line);
        std::int64_t id;
        std::int32_t cls;
        if (!(row >> id >> cls))
            throw MalformedDump("taxmap line " + std::to_string(line_no) + ": expected 'id<TAB>class'");
        map.class_of[id] = cls;
        max_class = std::max(max_class, cls);
    }
    if (map.num_classes == 0) map.num_classes = max_class + 1;
    return map;
}

}  // namespace taxdiff
