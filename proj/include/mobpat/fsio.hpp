#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mobpat::fsio {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Writes content to a temporary file beside `path`, then renames it into
// place, so readers never observe a partial file. Throws IoError.
void write_file(const std::string& path, std::string_view content);

// Whole file as bytes. Throws IoError when unreadable.
std::string read_file(const std::string& path);

// FNV-1a over the bytes, as 16 lowercase hex digits.
std::string digest_hex(std::string_view bytes);

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

// Level from MOBPAT_LOG (quiet|info|debug); unset or unknown means info.
LogLevel log_level();

// One diagnostic line to stderr when `level` is within the active level.
void log(LogLevel level, const std::string& message);

}  // namespace mobpat::fsio
