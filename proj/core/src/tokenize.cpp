#include <algorithm>
#include <cctype>

#include "avground/caption_metrics.hpp"
#include "avground/error.hpp"

namespace avground {

TokenizedCaption::TokenizedCaption(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (std::any_of(tokens_.begin(), tokens_.end(), [](const auto& t) { return t.empty(); })) {
    throw InvalidArgument("empty token in caption");
  }
}

TokenizedCaption tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 0x80 && (c <= ' ' || c == 0x7f)) {
      flush();
    } else if (c < 0x80 && !std::isalnum(c)) {
      flush();  // punctuation
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      current.push_back(raw);
    }
  }
  flush();
  return TokenizedCaption(std::move(tokens));
}

}  // namespace avground
