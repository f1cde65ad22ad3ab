#pragma once

#include <string_view>

// Copies of the files under data/, compiled into the library.
namespace cvqa::embedded {

extern const std::string_view vietnamese_letters;
extern const std::string_view templates;
extern const std::string_view qtype_keywords;
extern const std::string_view exemplars;

}  // namespace cvqa::embedded
