#include "config_file.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "xltag/errors.h"

namespace xltag::cli {

namespace {

std::string trim(const std::string &s) {
  const char *space = " \t\r";
  const size_t begin = s.find_first_not_of(space);
  if (begin == std::string::npos) return "";
  return s.substr(begin, s.find_last_not_of(space) - begin + 1);
}

}  // namespace

ConfigEntries parse_config(const std::string &text) {
  ConfigEntries entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    std::replace(key.begin(), key.end(), '_', '-');
    if (!seen.insert(key).second) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

ConfigEntries load_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace xltag::cli
