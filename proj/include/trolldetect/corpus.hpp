#pragma once

// Comment ingestion and per-user aggregation.

#include <cstddef>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <unicode/ustring.h>

#include "trolldetect/csv.hpp"
#include "trolldetect/error.hpp"

namespace trolldetect::corpus {

/// One raw comment. The text is kept exactly as ingested.
struct Comment {
  std::string user_id;
  std::string text;

  friend bool operator==(const Comment&, const Comment&) = default;
};

/// All messages of one user, in input order. Never empty.
struct UserDocument {
  std::string user_id;
  std::vector<std::string> messages;

  std::size_t message_count() const noexcept { return messages.size(); }

  friend bool operator==(const UserDocument&, const UserDocument&) = default;
};

enum class Format { jsonl, csv };

struct ParseOptions {
  Format format = Format::jsonl;
  /// Skip bad records (reported in ParseResult::skipped) instead of failing.
  bool lenient = false;
};

/// A rejected record.
struct ParseIssue {
  enum class Kind { syntax, decode, schema };

  Kind kind;
  std::size_t line;
  std::string message;
};

struct ParseResult {
  std::vector<Comment> comments;
  std::vector<ParseIssue> skipped;
};

inline const char* to_string(ParseIssue::Kind kind) {
  switch (kind) {
    case ParseIssue::Kind::syntax:
      return "syntax error";
    case ParseIssue::Kind::decode:
      return "decode error";
    case ParseIssue::Kind::schema:
      return "schema error";
  }
  return "error";
}

inline std::string describe(const ParseIssue& issue) {
  return "line " + std::to_string(issue.line) + ": " + to_string(issue.kind) +
         ": " + issue.message;
}

/// True when the bytes form well-formed UTF-8.
inline bool is_valid_utf8(std::string_view bytes) {
  if (bytes.empty()) return true;
  UErrorCode status = U_ZERO_ERROR;
  int32_t length = 0;
  u_strFromUTF8(nullptr, 0, &length, bytes.data(),
                static_cast<int32_t>(bytes.size()), &status);
  return status != U_INVALID_CHAR_FOUND && status != U_ILLEGAL_CHAR_FOUND &&
         (U_SUCCESS(status) || status == U_BUFFER_OVERFLOW_ERROR);
}

namespace detail {

class IssueSink {
 public:
  IssueSink(bool lenient, ParseResult& result)
      : lenient_(lenient), result_(result) {}

  void report(ParseIssue issue) {
    if (!lenient_) throw Error(ErrorKind::input, describe(issue));
    result_.skipped.push_back(std::move(issue));
  }

 private:
  bool lenient_;
  ParseResult& result_;
};

inline void parse_jsonl(std::string_view text, IssueSink& sink,
                        ParseResult& result) {
  std::size_t line_no = 0;
  for (std::size_t start = 0; start < text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    if (!is_valid_utf8(line)) {
      sink.report({ParseIssue::Kind::decode, line_no, "input is not valid UTF-8"});
      continue;
    }
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
      sink.report({ParseIssue::Kind::syntax, line_no, "malformed JSON"});
      continue;
    }
    if (!obj.is_object()) {
      sink.report({ParseIssue::Kind::schema, line_no, "expected a JSON object"});
      continue;
    }
    auto user = obj.find("user_id");
    auto body = obj.find("text");
    if (user == obj.end() || !user->is_string()) {
      sink.report({ParseIssue::Kind::schema, line_no,
                   "missing string field 'user_id'"});
      continue;
    }
    if (body == obj.end() || !body->is_string()) {
      sink.report({ParseIssue::Kind::schema, line_no,
                   "missing string field 'text'"});
      continue;
    }
    auto user_id = user->get<std::string>();
    if (user_id.empty()) {
      sink.report({ParseIssue::Kind::schema, line_no, "empty 'user_id'"});
      continue;
    }
    result.comments.push_back({std::move(user_id), body->get<std::string>()});
  }
}

inline void parse_csv(std::string_view text, IssueSink& sink,
                      ParseResult& result) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  csv::Reader reader(text);

  bool have_header = false;
  while (true) {
    std::optional<csv::Record> rec;
    try {
      rec = reader.next();
    } catch (const csv::SyntaxError& e) {
      if (!have_header)
        throw Error(ErrorKind::input, "line " + std::to_string(e.line) +
                                          ": syntax error: " + e.message);
      sink.report({ParseIssue::Kind::syntax, e.line, e.message});
      continue;
    }
    if (!rec) break;

    if (!have_header) {
      // A broken header makes every row uninterpretable, so it is always fatal.
      if (rec->fields != std::vector<std::string>{"user_id", "text"})
        throw Error(ErrorKind::input,
                    "line " + std::to_string(rec->line) +
                        ": schema error: header must be 'user_id,text'");
      have_header = true;
      continue;
    }
    if (rec->fields.size() != 2) {
      sink.report({ParseIssue::Kind::schema, rec->line,
                   "expected 2 fields, found " +
                       std::to_string(rec->fields.size())});
      continue;
    }
    if (!is_valid_utf8(rec->fields[0]) || !is_valid_utf8(rec->fields[1])) {
      sink.report({ParseIssue::Kind::decode, rec->line, "input is not valid UTF-8"});
      continue;
    }
    if (rec->fields[0].empty()) {
      sink.report({ParseIssue::Kind::schema, rec->line, "empty 'user_id'"});
      continue;
    }
    result.comments.push_back(
        {std::move(rec->fields[0]), std::move(rec->fields[1])});
  }
  if (!have_header)
    throw Error(ErrorKind::input, "schema error: missing 'user_id,text' header");
}

}  // namespace detail

/// Parses a complete comment dump held in memory.
///
/// Records with an empty text are kept. Errors are fatal unless
/// options.lenient is set, in which case the offending record is skipped and
/// listed in the result.
inline ParseResult parse_comments(std::string_view bytes,
                                  const ParseOptions& options) {
  ParseResult result;
  detail::IssueSink sink(options.lenient, result);
  if (options.format == Format::jsonl)
    detail::parse_jsonl(bytes, sink, result);
  else
    detail::parse_csv(bytes, sink, result);
  return result;
}

inline ParseResult parse_comments(std::istream& in, const ParseOptions& options) {
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorKind::io, "failed to read comment stream");
  return parse_comments(std::string_view(bytes), options);
}

/// Serializes comments as JSONL (one object per line).
inline std::string to_jsonl(const std::vector<Comment>& comments) {
  std::string out;
  for (const auto& c : comments) {
    nlohmann::ordered_json obj;
    obj["user_id"] = c.user_id;
    obj["text"] = c.text;
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

/// Groups comments into one document per user with at least min_messages
/// comments. Output is sorted by user_id; message order follows input order.
inline std::vector<UserDocument> group_by_user(
    const std::vector<Comment>& comments, std::size_t min_messages = 1) {
  if (min_messages < 1)
    throw Error(ErrorKind::input, "min_messages must be at least 1");

  std::map<std::string, std::vector<std::string>, std::less<>> by_user;
  for (const auto& c : comments) by_user[c.user_id].push_back(c.text);

  std::vector<UserDocument> docs;
  docs.reserve(by_user.size());
  for (auto& [user, messages] : by_user) {
    if (messages.size() >= min_messages)
      docs.push_back({user, std::move(messages)});
  }
  return docs;
}

}  // namespace trolldetect::corpus
