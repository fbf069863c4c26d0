#pragma once

// Text folding used before any character counting: UTF-8 decode, NFC,
// Unicode lowercasing, and optional Latin-to-Cyrillic homoglyph folding.

#include <cstddef>
#include <string>
#include <string_view>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "trolldetect/error.hpp"

namespace trolldetect::text {

struct FoldOptions {
  /// Map Latin letters that look like Cyrillic ones (a, c, e, o, p, x, y)
  /// onto their Cyrillic counterparts.
  bool homoglyphs = false;
};

inline char32_t fold_homoglyph(char32_t cp) noexcept {
  switch (cp) {
    case U'a': return U'а';
    case U'c': return U'с';
    case U'e': return U'е';
    case U'o': return U'о';
    case U'p': return U'р';
    case U'x': return U'х';
    case U'y': return U'у';
    default: return cp;
  }
}

/// Returns the folded text as Unicode scalar values.
///
/// The text is brought to NFC, lowercased with root-locale rules, and brought
/// to NFC again (full lowercasing can emit combining sequences).
inline std::u32string fold(std::string_view utf8, const FoldOptions& options = {}) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status))
    throw Error(ErrorKind::numeric, "ICU NFC normalizer unavailable");

  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s = nfc->normalize(s, status);
  s.toLower(icu::Locale::getRoot());
  s = nfc->normalize(s, status);
  if (U_FAILURE(status))
    throw Error(ErrorKind::numeric, "text normalization failed");

  std::u32string out;
  out.reserve(static_cast<std::size_t>(s.length()));
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) {
    auto cp = static_cast<char32_t>(s.char32At(i));
    out.push_back(options.homoglyphs ? fold_homoglyph(cp) : cp);
  }
  return out;
}

/// Occurrences of one symbol in a message together with the message length,
/// both measured on the folded text.
struct MessageCounts {
  std::size_t symbol = 0;  // occurrences of the tracked symbol
  std::size_t total = 0;   // all scalar values, whitespace included

  friend bool operator==(const MessageCounts&, const MessageCounts&) = default;
};

inline MessageCounts count_in_message(std::string_view utf8, char32_t symbol,
                                      const FoldOptions& options = {}) {
  const std::u32string folded = fold(utf8, options);
  MessageCounts counts{0, folded.size()};
  for (char32_t cp : folded)
    if (cp == symbol) ++counts.symbol;
  return counts;
}

/// UTF-8 encoding of a single scalar value.
inline std::string to_utf8(char32_t cp) {
  std::string out;
  icu::UnicodeString(static_cast<UChar32>(cp)).toUTF8String(out);
  return out;
}

}  // namespace trolldetect::text
