#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace reqlens {

// ASCII lower-casing with typographic apostrophes (U+2019) mapped to '\''.
// Used for every case-insensitive key in the pipeline.
std::string fold_case(std::string_view text);

std::string_view trim(std::string_view text);

// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_words(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Reads a whole file; throws Error(io) naming the path on failure.
std::string read_file(const std::filesystem::path& path);

// Writes `content` next to `path` and renames it into place. `before_rename`
// runs between the two steps (tests use it to simulate a crash).
void write_file_atomic(const std::filesystem::path& path, std::string_view content,
                       void (*before_rename)(const std::filesystem::path& temp) = nullptr);

}  // namespace reqlens
