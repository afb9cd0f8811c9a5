#include "maha/text.hpp"

#include <array>

namespace maha {

bool is_word_byte(unsigned char c) {
    if (c >= 0x80) return true;
    if (c >= '0' && c <= '9') return true;
    if (c >= 'a' && c <= 'z') return true;
    if (c >= 'A' && c <= 'Z') return true;
    return false;
}

static char lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::vector<Token> tokenize_with_offsets(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        std::size_t begin = i;
        std::string tok;
        while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) {
            tok.push_back(lower_ascii(text[i]));
            ++i;
        }
        out.push_back(Token{std::move(tok), begin, i});
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
    return out;
}

std::size_t count_tokens(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        bool w = is_word_byte(static_cast<unsigned char>(c));
        if (w && !in_token) ++count;
        in_token = w;
    }
    return count;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return s;
}

} // namespace maha
