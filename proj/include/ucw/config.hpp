#pragma once

#include <string>
#include <vector>

#include "ucw/harness.hpp"

namespace ucw {

/// Raised for unreadable files, unknown keys, and unparseable values; the
/// message names the offending key or path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the flat key=value experiment format. Lines are `key = value`;
/// `[section]` headers and `#` comments are allowed and ignored. Every key is
/// optional and falls back to the Fig.-1-scale default.
ExperimentConfig parse_config_file(const std::string& path);

/// Applies repeatable `key=value` overrides on top of a parsed config.
void apply_overrides(ExperimentConfig& config,
                     const std::vector<std::string>& overrides);

/// Documented config keys, one "key: description (default)" line each.
std::string config_key_help();

}  // namespace ucw
