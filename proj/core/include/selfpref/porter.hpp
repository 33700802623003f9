#pragma once

#include <string>
#include <string_view>

namespace selfpref::text {

// Classic Porter (1980) suffix-stripping stemmer for lowercase ASCII words.
// Words containing non-ASCII bytes or shorter than three letters are
// returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace selfpref::text
