#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tagseek {

struct CleanDocument {
  std::string source_url;
  std::vector<std::string> tokens;  // lowercase, [a-z]{2,}

  std::size_t token_count() const { return tokens.size(); }
};

// Drops script/style/comment subtrees, strips tags, decodes entities,
// lowercases, and tokenizes. Tokens are runs of Latin letters; a run that
// contains any letter outside ISO basic Latin (or a replacement character
// from a decode error) is discarded whole, as are runs shorter than two
// letters. Never fails: garbage in, possibly-empty token list out.
//
// declared_charset: "utf-8" (default) or "iso-8859-1"/"latin-1".
CleanDocument strip_html(std::string_view raw_bytes,
                         std::optional<std::string> declared_charset = {},
                         std::string source_url = {});

// The tokenizer half of strip_html, for already-plain text.
std::vector<std::string> tokenize_text(std::string_view text,
                                       std::optional<std::string> declared_charset = {});

}  // namespace tagseek
