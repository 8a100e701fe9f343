#include "taxdiff/manifest.hpp"

#include <fstream>
#include <sstream>

#include "taxdiff/errors.hpp"

namespace taxdiff {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoFailure("cannot read '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot write '" + path + "'");
    os << content;
    if (!os) throw IoFailure("write to '" + path + "' failed");
}

std::string file_digest(const std::string& path) {
    std::ostringstream os;
    os << "fnv1a64:" << std::hex;
    os.width(16);
    os.fill('0');
    os << fnv1a64(read_text_file(path));
    return os.str();
}

}  // namespace taxdiff
