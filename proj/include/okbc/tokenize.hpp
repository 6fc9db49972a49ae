#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

namespace okbc {

namespace detail {

// Unicode code points treated as whitespace separators, beyond ASCII.
inline bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case 0x00A0:  // no-break space
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200A);
    }
}

// Minimal UTF-8 decoder; invalid bytes are passed through as single units so
// tokenization never throws.
inline char32_t decode_utf8(const std::string& s, std::size_t& i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
        len = 2;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        len = 3;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        len = 4;
        cp = c & 0x07;
    } else {
        ++i;
        return c;
    }
    if (i + len > s.size()) {
        ++i;
        return c;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return c;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += len;
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline bool is_ascii_punct(char32_t cp) {
    return cp < 0x80 && std::ispunct(static_cast<int>(cp));
}

}  // namespace detail

// Word-level tokenizer: lowercases (ASCII), splits on Unicode whitespace and
// detaches punctuation marks as standalone tokens, so "Immune - based"
// and "Immune-based" both yield {"immune", "-", "based"}.
inline std::vector<std::string> tokenize(const std::string& phrase) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    std::size_t i = 0;
    while (i < phrase.size()) {
        const char32_t cp = detail::decode_utf8(phrase, i);
        if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
            detail::is_unicode_space(cp)) {
            flush();
        } else if (detail::is_ascii_punct(cp)) {
            flush();
            tokens.push_back(std::string(1, static_cast<char>(cp)));
        } else if (cp < 0x80) {
            current.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
        } else {
            detail::append_utf8(current, cp);
        }
    }
    flush();
    return tokens;
}

}  // namespace okbc
