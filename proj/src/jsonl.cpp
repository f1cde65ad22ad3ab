#include "cvqa/jsonl.hpp"

#include <sstream>

#include "cvqa/error.hpp"

namespace cvqa {

std::vector<JsonLine> read_json_lines(std::istream& in) {
    std::vector<JsonLine> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json value;
        try {
            value = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw FormatError(std::string("malformed record: ") + e.what(), line_no);
        }
        if (!value.is_object()) throw FormatError("record must be a JSON object", line_no);
        out.push_back({line_no, std::move(value)});
    }
    return out;
}

std::vector<JsonLine> read_json_lines(std::string_view text) {
    std::istringstream in{std::string(text)};
    return read_json_lines(in);
}

namespace {

const Json* field(const Json& obj, std::string_view key) {
    auto it = obj.find(std::string(key));
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

[[noreturn]] void type_error(std::string_view key, std::string_view expected, std::size_t line) {
    throw FormatError("field \"" + std::string(key) + "\" must be " + std::string(expected), line);
}

}  // namespace

std::string require_string(const Json& obj, std::string_view key, std::size_t line) {
    const Json* v = field(obj, key);
    if (v == nullptr) throw FormatError("missing field \"" + std::string(key) + "\"", line);
    if (!v->is_string()) type_error(key, "a string", line);
    return v->get<std::string>();
}

std::string optional_string(const Json& obj, std::string_view key, std::size_t line) {
    const Json* v = field(obj, key);
    if (v == nullptr) return {};
    if (!v->is_string()) type_error(key, "a string", line);
    return v->get<std::string>();
}

double require_number(const Json& obj, std::string_view key, std::size_t line) {
    const Json* v = field(obj, key);
    if (v == nullptr) throw FormatError("missing field \"" + std::string(key) + "\"", line);
    if (!v->is_number()) type_error(key, "a number", line);
    return v->get<double>();
}

long long require_integer(const Json& obj, std::string_view key, std::size_t line) {
    const Json* v = field(obj, key);
    if (v == nullptr) throw FormatError("missing field \"" + std::string(key) + "\"", line);
    if (!v->is_number_integer()) type_error(key, "an integer", line);
    return v->get<long long>();
}

std::vector<std::string> string_list(const Json& obj, std::string_view key, std::size_t line, bool required) {
    const Json* v = field(obj, key);
    if (v == nullptr) {
        if (required) throw FormatError("missing field \"" + std::string(key) + "\"", line);
        return {};
    }
    if (!v->is_array()) type_error(key, "a list of strings", line);
    std::vector<std::string> out;
    for (const auto& item : *v) {
        if (!item.is_string()) type_error(key, "a list of strings", line);
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string dump_line(const Json& value) {
    return value.dump(-1, ' ', false, Json::error_handler_t::replace);
}

}  // namespace cvqa
