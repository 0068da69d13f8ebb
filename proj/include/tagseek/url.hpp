#pragma once

#include <optional>
#include <string>

namespace tagseek {

struct ParsedUrl {
  std::string scheme;  // lowercase
  std::string host;    // lowercase, no trailing dot
  int port = 0;        // 0 = default for scheme
  std::string path;    // starts with '/', percent-normalized
  std::string query;   // without '?', empty if absent
};

// Parses http/https URLs. Fragments are dropped, userinfo is not supported.
std::optional<ParsedUrl> parse_url(const std::string& raw);

// Canonical string form used as the store's primary key: lowercase
// scheme/host, default ports stripped, fragment stripped, path
// percent-normalized, query preserved verbatim.
std::optional<std::string> normalize_url(const std::string& raw);

std::string to_string(const ParsedUrl& u);

int default_port(const std::string& scheme);

}  // namespace tagseek
