#include "taxdiff/fasta.hpp"

#include <fstream>
#include <sstream>

#include "taxdiff/errors.hpp"

namespace taxdiff {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

struct RawRecord {
    std::string id;
    std::string body;
};

std::vector<RawRecord> split_records(std::string_view text) {
    std::vector<RawRecord> raw;
    std::size_t pos = 0;
    bool in_record = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos) ? text.substr(pos)
                                                                : text.substr(pos, eol - pos);
        line = trim(line);
        if (!line.empty()) {
            if (line.front() == '>') {
                raw.push_back({std::string(trim(line.substr(1))), {}});
                in_record = true;
            } else {
                if (!in_record) throw MalformedFasta("sequence data before first header");
                for (char c : line)
                    if (c != ' ' && c != '\t') raw.back().body.push_back(c);
            }
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return raw;
}

}  // namespace

std::vector<FastaRecord> parse_fasta(std::string_view text) {
    std::vector<FastaRecord> records;
    for (auto& r : split_records(text)) {
        if (r.body.empty()) throw MalformedFasta("record '" + r.id + "' has no sequence");
        try {
            records.push_back({std::move(r.id), ProteinSequence::from_string(r.body)});
        } catch (const InvalidResidue& e) {
            throw InvalidResidue("record '" + r.id + "': " + e.what());
        }
    }
    return records;
}

LenientFasta parse_fasta_lenient(std::string_view text) {
    LenientFasta out;
    for (auto& r : split_records(text)) {
        if (r.body.empty()) {
            out.rejected.push_back("record '" + r.id + "' has no sequence");
            continue;
        }
        try {
            out.records.push_back({r.id, ProteinSequence::from_string(r.body)});
        } catch (const InvalidResidue& e) {
            out.rejected.push_back("record '" + r.id + "': " + e.what());
        }
    }
    return out;
}

std::vector<FastaRecord> parse_fasta_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open fasta file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_fasta(buf.str());
}

std::string write_fasta(const std::vector<FastaRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        out.push_back('>');
        out += rec.id;
        out.push_back('\n');
        const std::string seq = rec.seq.to_string();
        for (std::size_t i = 0; i < seq.size(); i += 60) {
            out += seq.substr(i, 60);
            out.push_back('\n');
        }
    }
    return out;
}

void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open for writing: " + path);
    out << write_fasta(records);
    if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace taxdiff
