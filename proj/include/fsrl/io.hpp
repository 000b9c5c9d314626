#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fsrl {

/// Writes `contents` to a sibling temp file and renames it over `path`.
/// Creates parent directories. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace fsrl
