#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace crossfake {

// Every artifact is written with keys in insertion order so the files read
// in schema order and serialise identically across runs.
using Json = nlohmann::ordered_json;

/// Parses a whole file; throws ValidationError on I/O or syntax errors.
Json read_json_file(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline, replacing the file atomically.
void write_json_file(const std::filesystem::path& path, const Json& value);

/// Writes `contents` to `path` through a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace crossfake
