#pragma once

#include <map>
#include <string>
#include <vector>

namespace sdidkit {

std::string sha256_hex(const std::string &data);
std::string sha256_file_hex(const std::string &path);

// Records what a CLI run consumed and produced, next to the outputs.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string timestamp; // ISO-8601 UTC
  std::map<std::string, std::string> parameters;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::pair<std::string, std::string>> outputs; // path, digest

  void add_input(const std::string &path);
  void add_output(const std::string &path); // digest computed from disk
  void write(const std::string &path) const;
};

RunManifest make_manifest(const std::string &command);

} // namespace sdidkit
