#include "tagseek/url.hpp"

#include <cctype>

namespace tagseek {

namespace {

std::string lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

bool is_unreserved(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' || c == '~';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Decode %XX for unreserved characters, uppercase the hex of the rest.
// Malformed escapes pass through untouched.
std::string percent_normalize(const std::string& in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '%' && i + 2 < in.size()) {
      int hi = hex_value(in[i + 1]);
      int lo = hex_value(in[i + 2]);
      if (hi >= 0 && lo >= 0) {
        char decoded = static_cast<char>(hi * 16 + lo);
        if (is_unreserved(decoded)) {
          out.push_back(decoded);
        } else {
          out.push_back('%');
          out.push_back(static_cast<char>(std::toupper(in[i + 1])));
          out.push_back(static_cast<char>(std::toupper(in[i + 2])));
        }
        i += 2;
        continue;
      }
    }
    out.push_back(in[i]);
  }
  return out;
}

bool valid_host(const std::string& h) {
  if (h.empty() || h.size() > 253) return false;
  for (char c : h) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
              c == '.' || c == '_';
    if (!ok) return false;
  }
  if (h.front() == '.' || h.back() == '.') return false;
  if (h.find("..") != std::string::npos) return false;
  return true;
}

}  // namespace

int default_port(const std::string& scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  return 0;
}

std::optional<ParsedUrl> parse_url(const std::string& raw) {
  std::string s = raw;
  // trim surrounding whitespace
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return std::nullopt;
  std::size_t e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);

  std::size_t scheme_end = s.find("://");
  if (scheme_end == std::string::npos || scheme_end == 0) return std::nullopt;
  ParsedUrl u;
  u.scheme = lower(s.substr(0, scheme_end));
  if (u.scheme != "http" && u.scheme != "https") return std::nullopt;

  std::size_t rest = scheme_end + 3;
  std::size_t frag = s.find('#', rest);
  if (frag != std::string::npos) s = s.substr(0, frag);

  std::size_t path_start = s.find('/', rest);
  std::size_t query_start = s.find('?', rest);
  std::size_t authority_end = std::min(
      path_start == std::string::npos ? s.size() : path_start,
      query_start == std::string::npos ? s.size() : query_start);
  std::string authority = s.substr(rest, authority_end - rest);
  if (authority.find('@') != std::string::npos) return std::nullopt;

  std::string host = authority;
  std::size_t colon = authority.rfind(':');
  if (colon != std::string::npos) {
    host = authority.substr(0, colon);
    std::string port_s = authority.substr(colon + 1);
    if (port_s.empty()) return std::nullopt;
    int port = 0;
    for (char c : port_s) {
      if (c < '0' || c > '9') return std::nullopt;
      port = port * 10 + (c - '0');
      if (port > 65535) return std::nullopt;
    }
    u.port = port;
  }
  host = lower(host);
  if (!host.empty() && host.back() == '.') host.pop_back();
  if (!valid_host(host)) return std::nullopt;
  u.host = host;
  if (u.port == default_port(u.scheme)) u.port = 0;

  std::string path;
  if (path_start != std::string::npos &&
      (query_start == std::string::npos || path_start < query_start)) {
    std::size_t path_end =
        query_start == std::string::npos ? s.size() : query_start;
    path = s.substr(path_start, path_end - path_start);
  }
  if (path.empty()) path = "/";
  u.path = percent_normalize(path);

  if (query_start != std::string::npos && query_start + 1 <= s.size())
    u.query = s.substr(query_start + 1);
  return u;
}

std::string to_string(const ParsedUrl& u) {
  std::string out = u.scheme + "://" + u.host;
  if (u.port != 0) out += ":" + std::to_string(u.port);
  out += u.path;
  if (!u.query.empty()) out += "?" + u.query;
  return out;
}

std::optional<std::string> normalize_url(const std::string& raw) {
  auto parsed = parse_url(raw);
  if (!parsed) return std::nullopt;
  return to_string(*parsed);
}

}  // namespace tagseek
