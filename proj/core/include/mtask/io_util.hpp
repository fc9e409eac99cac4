#ifndef MTASK_IO_UTIL_HPP
#define MTASK_IO_UTIL_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mtask {

/// Shortest decimal string that round-trips the exact double value.
std::string format_double(double v);

/// Strict double parse of the whole token. `where` names file/row for errors.
double parse_double(std::string_view token, const std::string& where);

/// Strict integer parse of the whole token.
long long parse_int(std::string_view token, const std::string& where);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_text_file(const std::filesystem::path& path);

/// Atomic-ish write: write to a temp file in the same directory, then rename.
void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace mtask

#endif
