#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gevr::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::optional<std::uint64_t> seed;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();

  /// Writes `<primary>.manifest.json` next to the primary output.
  void write(const std::filesystem::path& primary) const;
};

}  // namespace gevr::cli
