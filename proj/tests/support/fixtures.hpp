#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affiche/config.hpp"

namespace fixtures {

inline std::filesystem::path source_dir() { return AFFICHE_SOURCE_DIR; }
inline std::filesystem::path config_dir() { return source_dir() / "config"; }
inline std::filesystem::path test_data() { return AFFICHE_TEST_DATA; }

inline nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

// The three bundled documents, in load order.
inline std::vector<nlohmann::json> bundled_documents() {
  return {read_json(config_dir() / "colours.json"), read_json(config_dir() / "typefaces.json"),
          read_json(config_dir() / "music.json")};
}

inline affiche::StyleConfig bundled_config() { return affiche::load_config_dir(config_dir()); }

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("affiche_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  const std::string s = read_text(p);
  return {s.begin(), s.end()};
}

}  // namespace fixtures
