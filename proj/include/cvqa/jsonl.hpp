#pragma once

#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cvqa {

using Json = nlohmann::ordered_json;

/// One parsed record of a line-delimited JSON stream.
struct JsonLine {
    std::size_t line;  // 1-based
    Json value;
};

/// Reads every non-blank line as one JSON object. Throws FormatError with the line number.
std::vector<JsonLine> read_json_lines(std::istream& in);
std::vector<JsonLine> read_json_lines(std::string_view text);

/// Typed field access that reports the record line on failure.
std::string require_string(const Json& obj, std::string_view key, std::size_t line);
std::string optional_string(const Json& obj, std::string_view key, std::size_t line);
double require_number(const Json& obj, std::string_view key, std::size_t line);
long long require_integer(const Json& obj, std::string_view key, std::size_t line);
std::vector<std::string> string_list(const Json& obj, std::string_view key, std::size_t line, bool required);

std::string dump_line(const Json& value);

}  // namespace cvqa
