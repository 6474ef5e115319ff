#ifndef XLTAG_TOOLS_CONFIG_FILE_H_
#define XLTAG_TOOLS_CONFIG_FILE_H_

#include <string>
#include <utility>
#include <vector>

namespace xltag::cli {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Flat "key = value" file; blank lines and lines starting with '#' are
// skipped. Underscores in keys are read as dashes so that keys match the
// command-line flag names. Throws ConfigError on malformed lines, duplicate
// keys or an unreadable file.
ConfigEntries parse_config(const std::string &text);
ConfigEntries load_config_file(const std::string &path);

}  // namespace xltag::cli

#endif  // XLTAG_TOOLS_CONFIG_FILE_H_
