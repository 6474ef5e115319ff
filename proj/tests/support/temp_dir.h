#ifndef XLTAG_TESTS_TEMP_DIR_H_
#define XLTAG_TESTS_TEMP_DIR_H_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace xltag::testing {

// Empty directory under the system temp dir, recreated on every call.
inline std::filesystem::path fresh_dir(const std::string &name) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("xltag_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace xltag::testing

#endif  // XLTAG_TESTS_TEMP_DIR_H_
