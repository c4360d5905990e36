#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace incharacter {

std::string read_file(const std::filesystem::path& path);

// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string iso8601_now();

// Stable 64-bit FNV-1a, used for cache keys and seeded decisions.
std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed = 1469598103934665603ull);
std::string hex64(std::uint64_t value);

std::string to_lower(std::string text);
std::string trim(const std::string& text);
std::vector<std::string> split_lines(const std::string& text);
std::vector<std::string> word_tokens(const std::string& text);
bool contains_ci(const std::string& haystack, const std::string& needle);

// Uniform [0,1) derived from a hash; deterministic across platforms.
double hash_unit(std::uint64_t hash);

// The directory holding bundled scales, templates and sim fixtures.
// Defaults to the source-tree data/ directory; INCHARACTER_DATA overrides.
std::filesystem::path default_data_dir();

}  // namespace incharacter
