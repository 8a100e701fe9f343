#ifndef TAXDIFF_MANIFEST_HPP
#define TAXDIFF_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace taxdiff {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);

// "fnv1a64:<16 hex digits>" over the file's bytes
std::string file_digest(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace taxdiff

#endif
