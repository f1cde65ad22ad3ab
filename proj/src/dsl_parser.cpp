#include <charconv>
#include <set>

#include "cvqa/dsl.hpp"

namespace cvqa::dsl {

namespace {

bool is_ident_start(char c) { return c >= 'a' && c <= 'z'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class LineParser {
public:
    LineParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    Step parse_statement() {
        Step step;
        step.line = line_;
        skip_ws();
        step.var = identifier("variable name");
        skip_ws();
        expect('=');
        skip_ws();
        step.func = identifier("function name");
        skip_ws();
        expect('(');
        skip_ws();
        if (peek() != ')') {
            while (true) {
                skip_ws();
                arg_columns_.push_back(column());
                step.args.push_back(argument());
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                break;
            }
        }
        expect(')');
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected text after statement");
        return step;
    }

    std::size_t arg_column(std::size_t i) const { return arg_columns_.at(i); }
    std::size_t var_column() const { return first_column_; }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column()); }

private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    // 1-based column counted in code points.
    std::size_t column() const {
        std::size_t col = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if ((static_cast<unsigned char>(text_[i]) & 0xC0) != 0x80) ++col;
        }
        return col;
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    void expect(char c) {
        if (peek() != c) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of line");
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    std::string identifier(const char* what) {
        if (first_column_ == 0) first_column_ = column();
        if (!is_ident_start(peek())) fail(std::string("expected ") + what + " matching [a-z][a-z0-9_]*");
        const auto start = pos_;
        while (is_ident_char(peek())) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    Arg argument() {
        const char c = peek();
        if (c == '"') return string_literal();
        if (is_digit(c) || c == '-') return integer_literal();
        if (is_ident_start(c)) {
            auto name = identifier("argument");
            skip_ws();
            if (peek() == '(') fail("nested calls are not allowed; bind the inner call to a variable first");
            return VarRef{std::move(name)};
        }
        if (c == '\0') fail("expected argument before end of line");
        fail("expected a variable, string literal or integer literal");
    }

    Arg string_literal() {
        ++pos_;  // opening quote
        std::string value;
        while (true) {
            if (pos_ >= text_.size()) fail("unterminated string literal");
            const char c = text_[pos_];
            if (c == '"') {
                ++pos_;
                break;
            }
            if (c == '\\') {
                ++pos_;
                switch (peek()) {
                    case '"': value.push_back('"'); break;
                    case '\\': value.push_back('\\'); break;
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    default: fail("unknown escape sequence in string literal");
                }
                ++pos_;
                continue;
            }
            value.push_back(c);
            ++pos_;
        }
        return StringLit{std::move(value)};
    }

    Arg integer_literal() {
        const auto start = pos_;
        if (peek() == '-') ++pos_;
        if (!is_digit(peek())) fail("expected digits in integer literal");
        while (is_digit(peek())) ++pos_;
        if (is_ident_char(peek())) fail("malformed integer literal");
        long long value = 0;
        const auto* first = text_.data() + start;
        const auto* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) fail("integer literal out of range");
        return IntLit{value};
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
    std::size_t first_column_ = 0;
    std::vector<std::size_t> arg_columns_;
};

// Drops a trailing `#` comment, ignoring '#' inside string literals.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

void append_escaped(std::string& out, std::string_view value) {
    out.push_back('"');
    for (char c : value) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('"');
}

}  // namespace

Program parse_program(std::string_view source) {
    Program program;
    std::set<std::string, std::less<>> bound;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= source.size()) {
        auto end = source.find('\n', start);
        if (end == std::string_view::npos) end = source.size();
        auto line = source.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        line = strip_comment(line);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (end == source.size()) break;
            continue;
        }

        LineParser parser(line, line_no);
        Step step = parser.parse_statement();
        for (std::size_t i = 0; i < step.args.size(); ++i) {
            if (const auto* ref = std::get_if<VarRef>(&step.args[i]); ref && !bound.contains(ref->name)) {
                throw ParseError("reference to unbound variable \"" + ref->name + "\"", line_no,
                                 parser.arg_column(i));
            }
        }
        if (!bound.insert(step.var).second) {
            throw ParseError("duplicate variable \"" + step.var + "\"", line_no, parser.var_column());
        }
        program.steps.push_back(std::move(step));
        if (end == source.size()) break;
    }
    return program;
}

std::string format_program(const Program& program) {
    std::string out;
    for (const auto& step : program.steps) {
        out += step.var;
        out += " = ";
        out += step.func;
        out.push_back('(');
        for (std::size_t i = 0; i < step.args.size(); ++i) {
            if (i > 0) out += ", ";
            std::visit(
                [&](const auto& arg) {
                    using T = std::decay_t<decltype(arg)>;
                    if constexpr (std::is_same_v<T, VarRef>) out += arg.name;
                    else if constexpr (std::is_same_v<T, StringLit>) append_escaped(out, arg.value);
                    else out += std::to_string(arg.value);
                },
                step.args[i]);
        }
        out += ")\n";
    }
    return out;
}

}  // namespace cvqa::dsl
