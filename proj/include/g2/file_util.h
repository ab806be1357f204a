#ifndef G2_FILE_UTIL_H_
#define G2_FILE_UTIL_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace g2 {

std::string ReadFile(const std::filesystem::path& path);
std::vector<std::string> ReadLines(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

}  // namespace g2

#endif  // G2_FILE_UTIL_H_
