// Text normalization and tokenization shared by ingestion, matching and
// name comparison. One normal form everywhere: lowercase, diacritics folded
// to ASCII, punctuation to spaces, whitespace collapsed.

#ifndef SNPL_TEXT_HPP
#define SNPL_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace snpl::text {

namespace detail {

// Latin-1 supplement U+00C0..U+00FF folded to ASCII, one char per codepoint.
// Multiplication/division signs become spaces.
inline constexpr char kLatin1Fold[64 + 1] = "aaaaaaaceeeeiiiidnooooo o"
                                            "uuuuyts"
                                            "aaaaaaaceeeeiiiidnooooo o"
                                            "uuuuyty";

// Latin Extended-A U+0100..U+017F.
inline constexpr char kLatinExtAFold[128 + 1] = "aaaaaacccccccc"
                                                "dddd"
                                                "eeeeeeeeee"
                                                "gggggggg"
                                                "hhhh"
                                                "iiiiiiiiii"
                                                "iijj"
                                                "kkk"
                                                "llllllllll"
                                                "nnnnnnnnn"
                                                "oooooooo"
                                                "rrrrrr"
                                                "ssssssss"
                                                "tttttt"
                                                "uuuuuuuuuuuu"
                                                "ww"
                                                "yyy"
                                                "zzzzzz"
                                                "s";

} // namespace detail

// Lowercase, fold Latin diacritics, map everything that is not [a-z0-9] to a
// space, collapse runs of spaces, trim. Codepoints outside the folded Latin
// ranges are treated as separators.
inline std::string normalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    auto put = [&](char c) {
        if (c == ' ') {
            if (!out.empty())
                pending_space = true;
            return;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    };

    for (std::size_t i = 0; i < raw.size();) {
        const unsigned char b = static_cast<unsigned char>(raw[i]);
        if (b < 0x80) {
            if (b >= 'a' && b <= 'z')
                put(static_cast<char>(b));
            else if (b >= 'A' && b <= 'Z')
                put(static_cast<char>(b - 'A' + 'a'));
            else if (b >= '0' && b <= '9')
                put(static_cast<char>(b));
            else
                put(' ');
            ++i;
            continue;
        }
        // Multi-byte UTF-8: fold the two Latin ranges, drop the rest.
        std::size_t len = 1;
        if ((b & 0xE0) == 0xC0)
            len = 2;
        else if ((b & 0xF0) == 0xE0)
            len = 3;
        else if ((b & 0xF8) == 0xF0)
            len = 4;
        if (len == 2 && i + 1 < raw.size()) {
            const unsigned char b2 = static_cast<unsigned char>(raw[i + 1]);
            const unsigned cp = ((b & 0x1Fu) << 6) | (b2 & 0x3Fu);
            if (cp >= 0xC0 && cp <= 0xFF) {
                const char c = detail::kLatin1Fold[cp - 0xC0];
                put(c);
            } else if (cp >= 0x100 && cp <= 0x17F) {
                put(detail::kLatinExtAFold[cp - 0x100]);
            } else {
                put(' ');
            }
        } else {
            put(' ');
        }
        i += len;
        while (len > 1 && i < raw.size() &&
               (static_cast<unsigned char>(raw[i]) & 0xC0) == 0x80 && --len > 1)
            ++i; // tolerate truncated sequences
    }
    return out;
}

// Split an already-normalized string on single spaces.
inline std::vector<std::string> tokens(std::string_view normalized) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        const std::size_t sp = normalized.find(' ', pos);
        const std::size_t end = (sp == std::string_view::npos) ? normalized.size() : sp;
        if (end > pos)
            out.emplace_back(normalized.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

// Token-boundary containment of a normalized phrase in a normalized string.
// "nature" is not found in "signature analysis".
inline bool contains_phrase(std::string_view hay_norm, std::string_view needle_norm) {
    if (needle_norm.empty())
        return false;
    std::size_t pos = 0;
    while ((pos = hay_norm.find(needle_norm, pos)) != std::string_view::npos) {
        const bool left_ok = pos == 0 || hay_norm[pos - 1] == ' ';
        const std::size_t end = pos + needle_norm.size();
        const bool right_ok = end == hay_norm.size() || hay_norm[end] == ' ';
        if (left_ok && right_ok)
            return true;
        ++pos;
    }
    return false;
}

inline bool contains_token(std::string_view hay_norm, std::string_view token) {
    return contains_phrase(hay_norm, token);
}

// Generic split helper for delimited fields (no escaping applied).
inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t p = s.find(sep, pos);
        if (p == std::string_view::npos) {
            out.emplace_back(s.substr(pos));
            return out;
        }
        out.emplace_back(s.substr(pos, p - pos));
        pos = p + 1;
    }
}

// Escaping for TSV cells and ';'-separated list items. Tab, newline,
// semicolon and backslash are escaped so arbitrary citation strings survive
// the round trip.
inline std::string tsv_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case ';': out += "\\;"; break;
        case '\\': out += "\\\\"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

inline std::string tsv_unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out.push_back(s[i]);
            continue;
        }
        switch (s[++i]) {
        case 't': out.push_back('\t'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case ';': out.push_back(';'); break;
        case '\\': out.push_back('\\'); break;
        default: out.push_back(s[i]);
        }
    }
    return out;
}

// Splits a ';'-separated list cell, honouring the escaping above.
inline std::vector<std::string> split_list(std::string_view cell) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < cell.size(); ++i) {
        if (cell[i] == '\\' && i + 1 < cell.size()) {
            cur.push_back(cell[i]);
            cur.push_back(cell[++i]);
        } else if (cell[i] == ';') {
            out.push_back(tsv_unescape(cur));
            cur.clear();
        } else {
            cur.push_back(cell[i]);
        }
    }
    if (!cur.empty() || !out.empty() || !cell.empty())
        out.push_back(tsv_unescape(cur));
    return out;
}

inline std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out.push_back(';');
        out += tsv_escape(items[i]);
    }
    return out;
}

// FNV-1a, used for config digests and determinism checks.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

} // namespace snpl::text

#endif // SNPL_TEXT_HPP
