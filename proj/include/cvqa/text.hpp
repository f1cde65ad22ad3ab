#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cvqa::text {

std::u32string decode_utf8(std::string_view input);
std::string encode_utf8(std::u32string_view input);

/// Vietnamese letter data: canonical decompositions, lowercase forms and ASCII folds
/// for every precomposed letter of the alphabet (plus đ/Đ).
class LetterTable {
public:
    /// Parses the tab-separated table format of data/vietnamese_letters.tsv.
    static LetterTable parse(std::string_view tsv);
    static const LetterTable& bundled();

    /// Canonical decomposition of `c`, or `c` itself when it is not in the table.
    std::u32string decompose(char32_t c) const;
    /// Precomposed letter for a base letter followed by canonically ordered marks.
    char32_t compose(std::u32string_view sequence) const;
    char32_t to_lower(char32_t c) const;
    /// Lowercase ASCII base letter, or 0 when `c` is not a Vietnamese letter.
    char fold(char32_t c) const;

    std::size_t size() const { return decompositions_.size(); }

private:
    std::unordered_map<char32_t, std::u32string> decompositions_;
    std::unordered_map<std::u32string, char32_t> compositions_;
    std::unordered_map<char32_t, char32_t> lower_;
    std::unordered_map<char32_t, char> fold_;
};

/// Composed form, lowercased, whitespace collapsed and trimmed. With
/// `fold_diacritics`, Vietnamese letters are reduced to their ASCII base letters
/// and any remaining combining marks are dropped.
std::string normalize_text(std::string_view input, bool fold_diacritics);

/// Splits already-normalized text on single spaces.
std::vector<std::string> split_tokens(std::string_view normalized);

/// Levenshtein distance over code points.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

bool is_space(char32_t c);
bool is_combining_mark(char32_t c);

}  // namespace cvqa::text
