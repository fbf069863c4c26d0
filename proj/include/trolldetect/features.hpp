#pragma once

// Per-user feature vectors: message count, mean message length and pooled
// frequencies of a fixed set of symbols; plus the feature matrix and its
// min-max normalization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "trolldetect/corpus.hpp"
#include "trolldetect/csv.hpp"
#include "trolldetect/error.hpp"
#include "trolldetect/parallel.hpp"
#include "trolldetect/text.hpp"

namespace trolldetect::features {

/// Number of leading non-frequency columns (message count, mean length).
inline constexpr std::size_t kLeadingColumns = 2;
inline constexpr std::size_t kMessageCountColumn = 0;
inline constexpr std::size_t kLengthColumn = 1;

/// Ordered set of tracked symbols.
class SymbolSet {
 public:
  /// Cyrillic а е и о у э ю я, then ! and ?.
  static SymbolSet standard() {
    return SymbolSet({U'а', U'е', U'и', U'о', U'у', U'э', U'ю', U'я', U'!', U'?'});
  }

  /// Symbols are folded exactly like message text, so "А" tracks "а".
  explicit SymbolSet(std::vector<char32_t> symbols) {
    std::unordered_set<char32_t> seen;
    for (char32_t cp : symbols) {
      const std::u32string folded = text::fold(text::to_utf8(cp));
      if (folded.size() != 1)
        throw Error(ErrorKind::input, "symbol does not fold to a single character");
      if (!seen.insert(folded[0]).second)
        throw Error(ErrorKind::input, "duplicate symbol in symbol set");
      symbols_.push_back(folded[0]);
    }
    if (symbols_.empty()) throw Error(ErrorKind::input, "symbol set is empty");
  }

  /// Every code point of a UTF-8 string becomes one symbol.
  static SymbolSet from_utf8(std::string_view utf8) {
    if (!corpus::is_valid_utf8(utf8))
      throw Error(ErrorKind::input, "symbol list is not valid UTF-8");
    const icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    std::vector<char32_t> cps;
    for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1))
      cps.push_back(static_cast<char32_t>(s.char32At(i)));
    return SymbolSet(std::move(cps));
  }

  std::span<const char32_t> symbols() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  char32_t operator[](std::size_t i) const { return symbols_[i]; }

  std::string to_utf8() const {
    std::string out;
    for (char32_t cp : symbols_) out += text::to_utf8(cp);
    return out;
  }

  /// ASCII-safe column name for one symbol.
  static std::string column_name(char32_t cp) {
    switch (cp) {
      case U'а': return "f_a";
      case U'е': return "f_e";
      case U'и': return "f_i";
      case U'о': return "f_o";
      case U'у': return "f_u";
      case U'э': return "f_e2";
      case U'ю': return "f_yu";
      case U'я': return "f_ya";
      case U'!': return "f_excl";
      case U'?': return "f_quest";
      default: break;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "f_U+%04X", static_cast<unsigned>(cp));
    return buf;
  }

  /// Full feature column list: M, L, then one column per symbol.
  std::vector<std::string> column_names() const {
    std::vector<std::string> names{"M", "L"};
    for (char32_t cp : symbols_) names.push_back(column_name(cp));
    return names;
  }

  friend bool operator==(const SymbolSet&, const SymbolSet&) = default;

 private:
  std::vector<char32_t> symbols_;
};

struct UserFeatureVector {
  std::string user_id;
  std::size_t message_count = 0;
  double avg_length = 0.0;
  std::vector<double> freqs;  // aligned with the SymbolSet

  /// True when every message of the user was empty.
  bool all_empty() const noexcept { return avg_length == 0.0; }
};

/// Pooled frequency of one symbol over all messages of a document:
/// total occurrences divided by total characters. Zero for an all-empty
/// document.
inline double char_frequency(const corpus::UserDocument& doc, char32_t symbol,
                             const text::FoldOptions& options = {}) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& m : doc.messages) {
    const auto c = text::count_in_message(m, symbol, options);
    hits += c.symbol;
    total += c.total;
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

/// Mean message length in characters.
inline double avg_length(const corpus::UserDocument& doc,
                         const text::FoldOptions& options = {}) {
  if (doc.messages.empty()) throw Error(ErrorKind::input, "empty user document");
  std::size_t total = 0;
  for (const auto& m : doc.messages) total += text::fold(m, options).size();
  return static_cast<double>(total) / static_cast<double>(doc.messages.size());
}

/// Single pass over the document. Integer counts are accumulated first and
/// divided once, so the result is identical to char_frequency/avg_length.
inline UserFeatureVector extract_features(const corpus::UserDocument& doc,
                                          const SymbolSet& symbols,
                                          const text::FoldOptions& options = {}) {
  if (doc.messages.empty())
    throw Error(ErrorKind::input, "user '" + doc.user_id + "' has no messages");

  std::vector<std::size_t> hits(symbols.size(), 0);
  std::size_t total = 0;
  for (const auto& m : doc.messages) {
    const std::u32string folded = text::fold(m, options);
    total += folded.size();
    for (char32_t cp : folded) {
      for (std::size_t j = 0; j < symbols.size(); ++j) {
        if (symbols[j] == cp) {
          ++hits[j];
          break;
        }
      }
    }
  }

  UserFeatureVector v;
  v.user_id = doc.user_id;
  v.message_count = doc.messages.size();
  v.avg_length = static_cast<double>(total) / static_cast<double>(v.message_count);
  v.freqs.resize(symbols.size(), 0.0);
  if (total > 0) {
    for (std::size_t j = 0; j < symbols.size(); ++j)
      v.freqs[j] = static_cast<double>(hits[j]) / static_cast<double>(total);
  }
  return v;
}

/// Extracts every document; results are in document order regardless of
/// the thread count.
inline std::vector<UserFeatureVector> extract_all(
    const std::vector<corpus::UserDocument>& docs, const SymbolSet& symbols,
    const text::FoldOptions& options = {}, std::size_t threads = 1) {
  std::vector<UserFeatureVector> out(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    out[i] = extract_features(docs[i], symbols, options);
  });
  return out;
}

/// Dense row-major matrix, one row per user.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  FeatureMatrix(std::vector<std::string> user_ids,
                std::vector<std::string> columns, std::vector<double> values)
      : user_ids_(std::move(user_ids)),
        columns_(std::move(columns)),
        values_(std::move(values)) {
    if (values_.size() != user_ids_.size() * columns_.size())
      throw Error(ErrorKind::input, "feature matrix shape mismatch");
  }

  std::size_t rows() const noexcept { return user_ids_.size(); }
  std::size_t cols() const noexcept { return columns_.size(); }
  bool empty() const noexcept { return user_ids_.empty(); }

  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols() + c];
  }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols(), cols());
  }

  const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::vector<std::string> user_ids_;
  std::vector<std::string> columns_;
  std::vector<double> values_;
};

inline FeatureMatrix build_matrix(const std::vector<UserFeatureVector>& vectors,
                                  const SymbolSet& symbols = SymbolSet::standard()) {
  if (vectors.empty()) throw Error(ErrorKind::input, "no feature vectors");
  const auto columns = symbols.column_names();

  std::unordered_set<std::string> seen;
  std::vector<std::string> ids;
  std::vector<double> values;
  values.reserve(vectors.size() * columns.size());
  for (const auto& v : vectors) {
    if (!seen.insert(v.user_id).second)
      throw Error(ErrorKind::input, "duplicate user_id '" + v.user_id + "'");
    if (v.freqs.size() != symbols.size())
      throw Error(ErrorKind::input, "feature vector length does not match symbol set");
    ids.push_back(v.user_id);
    values.push_back(static_cast<double>(v.message_count));
    values.push_back(v.avg_length);
    values.insert(values.end(), v.freqs.begin(), v.freqs.end());
  }
  return FeatureMatrix(std::move(ids), columns, std::move(values));
}

/// Per-column range recorded from a training matrix.
struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t size() const noexcept { return min.size(); }

  /// Value of column c mapped into [0, 1]. Constant columns map to 0.5 and
  /// values outside the recorded range are clamped.
  double normalize(std::size_t c, double v) const {
    const double span = max[c] - min[c];
    if (span <= 0.0) return 0.5;
    return std::clamp((v - min[c]) / span, 0.0, 1.0);
  }

  double denormalize(std::size_t c, double v) const {
    return min[c] + v * (max[c] - min[c]);
  }

  friend bool operator==(const NormalizationParams&,
                         const NormalizationParams&) = default;
};

inline NormalizationParams fit_normalization(const FeatureMatrix& m) {
  if (m.empty()) throw Error(ErrorKind::numeric, "cannot normalize an empty matrix");
  NormalizationParams p;
  p.min.assign(m.cols(), 0.0);
  p.max.assign(m.cols(), 0.0);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    p.min[c] = p.max[c] = m(0, c);
    for (std::size_t r = 1; r < m.rows(); ++r) {
      p.min[c] = std::min(p.min[c], m(r, c));
      p.max[c] = std::max(p.max[c], m(r, c));
    }
  }
  return p;
}

inline FeatureMatrix apply_normalization(const FeatureMatrix& m,
                                         const NormalizationParams& p) {
  if (p.size() != m.cols())
    throw Error(ErrorKind::input, "normalization parameters do not match matrix width");
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = p.normalize(c, m(r, c));
  return out;
}

// ---------------------------------------------------------------------------
// Feature CSV: header user_id,<columns...>; message count written as an
// integer, everything else as shortest round-trip decimal.

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorKind::input, "line " + std::to_string(line) +
                                      ": invalid number '" + std::string(s) + "'");
  return v;
}

inline std::string to_csv(const FeatureMatrix& m) {
  std::string out = "user_id";
  for (const auto& c : m.columns()) out += "," + c;
  out.push_back('\n');
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += csv::escape(m.user_ids()[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out.push_back(',');
      const double v = m(r, c);
      if (c == kMessageCountColumn)
        out += std::to_string(static_cast<unsigned long long>(v));
      else
        out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

inline FeatureMatrix from_csv(std::string_view text) {
  csv::Reader reader(text);
  std::vector<std::string> columns;
  std::vector<std::string> ids;
  std::vector<double> values;
  try {
    auto header = reader.next();
    if (!header || header->fields.size() < kLeadingColumns + 2 ||
        header->fields[0] != "user_id" || header->fields[1] != "M" ||
        header->fields[2] != "L")
      throw Error(ErrorKind::input, "feature CSV header must start with 'user_id,M,L'");
    columns.assign(header->fields.begin() + 1, header->fields.end());

    std::unordered_set<std::string> seen;
    while (auto rec = reader.next()) {
      if (rec->fields.size() != columns.size() + 1)
        throw Error(ErrorKind::input, "line " + std::to_string(rec->line) +
                                          ": wrong number of fields");
      if (rec->fields[0].empty() || !seen.insert(rec->fields[0]).second)
        throw Error(ErrorKind::input, "line " + std::to_string(rec->line) +
                                          ": empty or duplicate user_id");
      ids.push_back(rec->fields[0]);
      for (std::size_t c = 1; c < rec->fields.size(); ++c)
        values.push_back(parse_double(rec->fields[c], rec->line));
    }
  } catch (const csv::SyntaxError& e) {
    throw Error(ErrorKind::input,
                "line " + std::to_string(e.line) + ": " + e.message);
  }
  if (ids.empty()) throw Error(ErrorKind::input, "feature CSV has no rows");
  return FeatureMatrix(std::move(ids), std::move(columns), std::move(values));
}

}  // namespace trolldetect::features
