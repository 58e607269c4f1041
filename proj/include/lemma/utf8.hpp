#ifndef LEMMA_UTF8_HPP
#define LEMMA_UTF8_HPP

#include <string>
#include <string_view>
#include <vector>

namespace lemma {

// Splits a UTF-8 string into one std::string per Unicode scalar value.
// Invalid lead bytes are passed through as single-byte symbols.
inline std::vector<std::string> utf8_chars(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        unsigned char b = static_cast<unsigned char>(s[i]);
        size_t len = 1;
        if ((b & 0x80) == 0x00) len = 1;
        else if ((b & 0xE0) == 0xC0) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0) len = 4;
        if (i + len > s.size()) len = 1;
        out.emplace_back(s.substr(i, len));
        i += len;
    }
    return out;
}

inline size_t utf8_length(std::string_view s) { return utf8_chars(s).size(); }

// ASCII plus basic Cyrillic lowercasing; other codepoints pass through.
inline std::string to_lower(std::string_view s) {
    std::string out;
    auto chars = utf8_chars(s);
    for (auto& c : chars) {
        if (c.size() == 1 && c[0] >= 'A' && c[0] <= 'Z') {
            out += static_cast<char>(c[0] - 'A' + 'a');
        } else if (c.size() == 2) {
            unsigned char b0 = c[0], b1 = c[1];
            unsigned cp = ((b0 & 0x1Fu) << 6) | (b1 & 0x3Fu);
            if (cp >= 0x410 && cp <= 0x42F) cp += 0x20;        // А..Я
            else if (cp == 0x401) cp = 0x451;                  // Ё
            else if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) cp += 0x20;  // Latin-1
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += c;
        }
    }
    return out;
}

}  // namespace lemma

#endif
