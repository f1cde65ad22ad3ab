#include "cvqa/text.hpp"

#include <algorithm>
#include <stdexcept>

#include "cvqa/embedded_data.hpp"
#include "cvqa/error.hpp"

namespace cvqa::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Canonical combining classes for U+0300..U+036F.
int combining_class(char32_t c) {
    if (c < 0x0300 || c > 0x036F) return 0;
    if (c <= 0x0314) return 230;
    if (c == 0x0315 || c == 0x031A || c == 0x0358) return 232;
    if (c == 0x031B) return 216;
    if (c == 0x0321 || c == 0x0322 || c == 0x0327 || c == 0x0328) return 202;
    if (c >= 0x0334 && c <= 0x0338) return 1;
    if (c == 0x0345) return 240;
    if (c == 0x034F) return 0;
    if (c == 0x035C || c == 0x035F || c == 0x0362) return 233;
    if (c == 0x035D || c == 0x035E || c == 0x0360 || c == 0x0361) return 234;
    if ((c >= 0x0316 && c <= 0x0319) || (c >= 0x031C && c <= 0x0320) || (c >= 0x0323 && c <= 0x0326) ||
        (c >= 0x0329 && c <= 0x0333) || (c >= 0x0339 && c <= 0x033C) || (c >= 0x0347 && c <= 0x0349) ||
        c == 0x034D || c == 0x034E || (c >= 0x0353 && c <= 0x0356) || c == 0x0359 || c == 0x035A)
        return 220;
    return 230;
}

char32_t parse_hex(std::string_view s, std::size_t line) {
    try {
        std::size_t used = 0;
        unsigned long v = std::stoul(std::string(s), &used, 16);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return static_cast<char32_t>(v);
    } catch (const std::exception&) {
        throw FormatError("bad code point \"" + std::string(s) + "\" in letter table", line);
    }
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::u32string decode_utf8(std::string_view input) {
    std::u32string out;
    out.reserve(input.size());
    std::size_t i = 0;
    const auto n = input.size();
    while (i < n) {
        auto b0 = static_cast<unsigned char>(input[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int extra = 0;
        char32_t cp = 0;
        if ((b0 & 0xE0) == 0xC0) {
            extra = 1;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            extra = 2;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            extra = 3;
            cp = b0 & 0x07;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + extra >= n) {
            out.push_back(kReplacement);
            break;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            auto b = static_cast<unsigned char>(input[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

std::string encode_utf8(std::u32string_view input) {
    std::string out;
    out.reserve(input.size());
    for (char32_t c : input) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if (c < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else if (c < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (c >> 12)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (c >> 18)));
            out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

LetterTable LetterTable::parse(std::string_view tsv) {
    LetterTable table;
    std::size_t line_no = 0;
    for (auto line : split_on(tsv, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        auto cols = split_on(line, '\t');
        if (cols.size() != 4) throw FormatError("letter table rows need 4 tab-separated columns", line_no);
        auto letter = decode_utf8(cols[0]);
        auto lower = decode_utf8(cols[2]);
        if (letter.size() != 1 || lower.size() != 1 || cols[3].size() != 1)
            throw FormatError("letter, lowercase and fold columns must each hold one character", line_no);
        std::u32string decomposition;
        for (auto hex : split_on(cols[1], ' ')) {
            if (!hex.empty()) decomposition.push_back(parse_hex(hex, line_no));
        }
        if (decomposition.empty()) throw FormatError("empty decomposition", line_no);
        const char32_t c = letter[0];
        table.decompositions_[c] = decomposition;
        if (decomposition.size() > 1) table.compositions_[decomposition] = c;
        table.lower_[c] = lower[0];
        table.fold_[c] = cols[3][0];
    }
    return table;
}

const LetterTable& LetterTable::bundled() {
    static const LetterTable table = parse(embedded::vietnamese_letters);
    return table;
}

std::u32string LetterTable::decompose(char32_t c) const {
    auto it = decompositions_.find(c);
    return it == decompositions_.end() ? std::u32string(1, c) : it->second;
}

char32_t LetterTable::compose(std::u32string_view sequence) const {
    auto it = compositions_.find(std::u32string(sequence));
    return it == compositions_.end() ? 0 : it->second;
}

char32_t LetterTable::to_lower(char32_t c) const {
    if (c >= U'A' && c <= U'Z') return c + 32;
    auto it = lower_.find(c);
    return it == lower_.end() ? c : it->second;
}

char LetterTable::fold(char32_t c) const {
    if (c < 0x80 && std::isalpha(static_cast<int>(c))) return static_cast<char>(std::tolower(static_cast<int>(c)));
    auto it = fold_.find(c);
    return it == fold_.end() ? 0 : it->second;
}

bool is_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
           c == 0x3000;
}

bool is_combining_mark(char32_t c) { return c >= 0x0300 && c <= 0x036F; }

std::string normalize_text(std::string_view input, bool fold_diacritics) {
    const auto& table = LetterTable::bundled();

    std::u32string decomposed;
    for (char32_t c : decode_utf8(input)) decomposed += table.decompose(c);

    // Canonical ordering of each run of combining marks.
    for (std::size_t i = 0; i < decomposed.size();) {
        if (!is_combining_mark(decomposed[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < decomposed.size() && is_combining_mark(decomposed[j])) ++j;
        std::stable_sort(decomposed.begin() + static_cast<std::ptrdiff_t>(i),
                         decomposed.begin() + static_cast<std::ptrdiff_t>(j),
                         [](char32_t a, char32_t b) { return combining_class(a) < combining_class(b); });
        i = j;
    }

    // Compose each starter with the longest run of following marks found in the table.
    std::u32string composed;
    composed.reserve(decomposed.size());
    for (std::size_t i = 0; i < decomposed.size();) {
        std::size_t j = i + 1;
        while (j < decomposed.size() && is_combining_mark(decomposed[j])) ++j;
        std::size_t take = j;
        char32_t letter = 0;
        for (; take > i + 1; --take) {
            letter = table.compose(std::u32string_view(decomposed).substr(i, take - i));
            if (letter != 0) break;
        }
        if (letter != 0) {
            composed.push_back(letter);
            composed.append(decomposed, take, j - take);
        } else {
            composed.append(decomposed, i, j - i);
        }
        i = j;
    }

    std::u32string out;
    out.reserve(composed.size());
    bool pending_space = false;
    for (char32_t c : composed) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        c = table.to_lower(c);
        if (fold_diacritics) {
            if (is_combining_mark(c)) continue;
            if (char base = table.fold(c)) c = static_cast<char32_t>(base);
        }
        if (pending_space) {
            out.push_back(U' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return encode_utf8(out);
}

std::vector<std::string> split_tokens(std::string_view normalized) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < normalized.size()) {
        auto end = normalized.find(' ', start);
        if (end == std::string_view::npos) end = normalized.size();
        if (end > start) tokens.emplace_back(normalized.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
            diag = up;
        }
    }
    return row[b.size()];
}

}  // namespace cvqa::text
