#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ontobuild::fsutil {

/// Whole file as bytes; throws Error naming the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over the target, so readers
/// never observe a half-written file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ontobuild::fsutil
