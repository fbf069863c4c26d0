#pragma once

// Minimal RFC 4180 reader and writer.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trolldetect::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// Thrown for structurally broken CSV; carries the offending line.
struct SyntaxError {
  std::size_t line;
  std::string message;
};

/// Splits a whole document into records. Quoted fields may contain commas,
/// doubled quotes and line breaks. CRLF and LF are both accepted. Completely
/// empty lines are skipped.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  /// Returns the next record, or nullopt at end of input. Throws
  /// SyntaxError; after a throw the reader resumes at the next line.
  std::optional<Record> next() {
    while (pos_ < text_.size() && is_line_break(text_[pos_])) consume_line_break();
    if (pos_ >= text_.size()) return std::nullopt;

    Record rec;
    rec.line = line_;
    std::string field;
    bool quoted = false;
    bool after_quote = false;  // closing quote seen, expecting , or EOL
    while (true) {
      if (pos_ >= text_.size()) {
        if (quoted) throw SyntaxError{rec.line, "unterminated quoted field"};
        rec.fields.push_back(std::move(field));
        return rec;
      }
      const char c = text_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
          } else {
            quoted = false;
            after_quote = true;
            ++pos_;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
          ++pos_;
        }
        continue;
      }
      if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
        ++pos_;
      } else if (is_line_break(c)) {
        consume_line_break();
        rec.fields.push_back(std::move(field));
        return rec;
      } else if (after_quote) {
        fail(rec.line, "unexpected character after closing quote");
      } else if (c == '"') {
        if (!field.empty()) fail(rec.line, "quote inside unquoted field");
        quoted = true;
        ++pos_;
      } else {
        field.push_back(c);
        ++pos_;
      }
    }
  }

 private:
  static bool is_line_break(char c) { return c == '\n' || c == '\r'; }

  // Skips the rest of the physical line so that a caller may resume.
  [[noreturn]] void fail(std::size_t line, const char* message) {
    while (pos_ < text_.size() && !is_line_break(text_[pos_])) ++pos_;
    throw SyntaxError{line, message};
  }

  void consume_line_break() {
    if (text_[pos_] == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n')
      ++pos_;
    ++pos_;
    ++line_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

/// Quotes a field only when it needs quoting.
inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace trolldetect::csv
