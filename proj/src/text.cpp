#include "tagseek/text.hpp"

#include <cctype>
#include <cstdint>

namespace tagseek {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool ascii_ieq(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

// Tag name starting at s[i] (i points just past '<' and an optional '/').
std::string_view tag_name_at(std::string_view s, std::size_t i) {
  std::size_t start = i;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i]))))
    ++i;
  return s.substr(start, i - start);
}

// Skip to the '>' that closes the tag opened at position i (s[i] == '<'),
// honoring quoted attribute values. Returns one past the '>'.
std::size_t skip_tag(std::string_view s, std::size_t i) {
  char quote = 0;
  for (++i; i < s.size(); ++i) {
    char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i + 1;
    }
  }
  return s.size();
}

// Find the closing "</name" for a raw-text element (script/style), then
// skip past its '>'. The element content is discarded entirely.
std::size_t skip_raw_element(std::string_view s, std::size_t i,
                             std::string_view name) {
  while (i < s.size()) {
    std::size_t lt = s.find('<', i);
    if (lt == std::string_view::npos) return s.size();
    if (lt + 1 < s.size() && s[lt + 1] == '/') {
      std::string_view candidate = tag_name_at(s, lt + 2);
      if (ascii_ieq(candidate, name)) return skip_tag(s, lt);
    }
    i = lt + 1;
  }
  return s.size();
}

// Replace markup with spaces, leaving only the document text.
std::string drop_markup(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c != '<') {
      out.push_back(c);
      ++i;
      continue;
    }
    out.push_back(' ');
    if (s.compare(i, 4, "<!--") == 0) {
      std::size_t end = s.find("-->", i + 4);
      i = end == std::string_view::npos ? s.size() : end + 3;
      continue;
    }
    if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
      i = skip_tag(s, i);
      continue;
    }
    std::string_view name =
        tag_name_at(s, i + 1 + (i + 1 < s.size() && s[i + 1] == '/' ? 1 : 0));
    if (ascii_ieq(name, "script") || ascii_ieq(name, "style")) {
      i = skip_tag(s, i);
      i = skip_raw_element(s, i, name);
      continue;
    }
    i = skip_tag(s, i);
  }
  return out;
}

int hex_digit(char32_t c) {
  if (c >= '0' && c <= '9') return static_cast<int>(c - '0');
  if (c >= 'a' && c <= 'f') return static_cast<int>(c - 'a' + 10);
  if (c >= 'A' && c <= 'F') return static_cast<int>(c - 'A' + 10);
  return -1;
}

std::vector<char32_t> decode_utf8(std::string_view bytes) {
  std::vector<char32_t> out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    unsigned char b = static_cast<unsigned char>(bytes[i]);
    if (b < 0x80) {
      out.push_back(b);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b & 0xE0) == 0xC0) {
      len = 2;
      cp = b & 0x1F;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
      cp = b & 0x0F;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
      cp = b & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > bytes.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      unsigned char cont = static_cast<unsigned char>(bytes[i + k]);
      if ((cont & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok || cp > 0x10FFFF) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::vector<char32_t> decode_latin1(std::string_view bytes) {
  std::vector<char32_t> out;
  out.reserve(bytes.size());
  for (char c : bytes) out.push_back(static_cast<unsigned char>(c));
  return out;
}

// The handful of named entities that matter for text extraction; anything
// unrecognized becomes a separator rather than leaking entity names as words.
std::optional<char32_t> named_entity(std::u32string_view name) {
  struct Entry {
    std::u32string_view name;
    char32_t value;
  };
  static constexpr Entry kTable[] = {
      {U"amp", '&'},  {U"lt", '<'},    {U"gt", '>'},   {U"quot", '"'},
      {U"apos", '\''}, {U"nbsp", ' '}, {U"ndash", 0x2013}, {U"mdash", 0x2014},
      {U"hellip", 0x2026}, {U"rsquo", 0x2019}, {U"lsquo", 0x2018},
      {U"rdquo", 0x201D}, {U"ldquo", 0x201C}, {U"copy", 0xA9},
  };
  for (const auto& e : kTable)
    if (e.name == name) return e.value;
  return std::nullopt;
}

std::vector<char32_t> decode_entities(const std::vector<char32_t>& in) {
  std::vector<char32_t> out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] != '&') {
      out.push_back(in[i]);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    std::u32string name;
    bool numeric = false, hex = false;
    if (j < in.size() && in[j] == '#') {
      numeric = true;
      ++j;
      if (j < in.size() && (in[j] == 'x' || in[j] == 'X')) {
        hex = true;
        ++j;
      }
    }
    std::size_t name_start = j;
    while (j < in.size() && j - name_start < 10 && in[j] != ';' &&
           in[j] != '&' &&
           (numeric ? hex_digit(in[j]) >= 0
                    : (in[j] < 0x80 &&
                       std::isalnum(static_cast<unsigned char>(in[j])))))
      ++j;
    if (j < in.size() && in[j] == ';' && j > name_start) {
      name.assign(in.begin() + name_start, in.begin() + j);
      char32_t value = 0;
      bool valid = false;
      if (numeric) {
        long code = 0;
        valid = true;
        for (char32_t c : name) {
          int d = hex_digit(c);
          if (!hex && d >= 10) {
            valid = false;
            break;
          }
          code = code * (hex ? 16 : 10) + d;
          if (code > 0x10FFFF) {
            valid = false;
            break;
          }
        }
        value = static_cast<char32_t>(code);
      } else if (auto v = named_entity(name)) {
        value = *v;
        valid = true;
      }
      out.push_back(valid ? value : U' ');
      i = j + 1;
      continue;
    }
    out.push_back('&');
    ++i;
  }
  return out;
}

enum class Cls { Basic, ExtendedLatin, Separator };

Cls classify(char32_t c) {
  if (c >= 'a' && c <= 'z') return Cls::Basic;
  if (c >= 'A' && c <= 'Z') return Cls::Basic;
  // Latin-1 supplement letters, Latin Extended-A/B and Extended Additional.
  if (c >= 0xC0 && c <= 0xFF && c != 0xD7 && c != 0xF7)
    return Cls::ExtendedLatin;
  if (c >= 0x100 && c <= 0x24F) return Cls::ExtendedLatin;
  if (c >= 0x1E00 && c <= 0x1EFF) return Cls::ExtendedLatin;
  // A replacement char usually stands for a mangled letter; let it poison
  // the token instead of splitting it into fake short words.
  if (c == kReplacement) return Cls::ExtendedLatin;
  return Cls::Separator;
}

std::vector<std::string> tokenize_codepoints(const std::vector<char32_t>& cps) {
  std::vector<std::string> tokens;
  std::string current;
  bool pure_basic = true;
  auto flush = [&] {
    if (pure_basic && current.size() >= 2) tokens.push_back(current);
    current.clear();
    pure_basic = true;
  };
  for (char32_t c : cps) {
    Cls cls = classify(c);
    if (cls == Cls::Separator) {
      flush();
      continue;
    }
    if (cls == Cls::Basic) {
      char lower = static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
      current.push_back(lower);
    } else {
      pure_basic = false;
      current.push_back('?');  // placeholder; token is dropped anyway
    }
  }
  flush();
  return tokens;
}

bool is_latin1_charset(const std::optional<std::string>& cs) {
  if (!cs) return false;
  std::string s;
  for (char c : *cs)
    if (c != '-' && c != '_' && c != ' ')
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return s == "iso88591" || s == "latin1" || s == "l1" || s == "cp1252" ||
         s == "windows1252";
}

}  // namespace

std::vector<std::string> tokenize_text(std::string_view text,
                                       std::optional<std::string> declared_charset) {
  auto cps = is_latin1_charset(declared_charset) ? decode_latin1(text)
                                                 : decode_utf8(text);
  return tokenize_codepoints(decode_entities(cps));
}

CleanDocument strip_html(std::string_view raw_bytes,
                         std::optional<std::string> declared_charset,
                         std::string source_url) {
  CleanDocument doc;
  doc.source_url = std::move(source_url);
  if (raw_bytes.empty()) return doc;
  std::string text = drop_markup(raw_bytes);
  doc.tokens = tokenize_text(text, std::move(declared_charset));
  return doc;
}

}  // namespace tagseek
