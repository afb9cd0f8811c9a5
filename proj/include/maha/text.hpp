#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace maha {

// Shared tokenizer: lowercase, split on maximal runs of non-alphanumeric
// bytes. Every module that counts or compares tokens (chunking, BM25,
// ROUGE-L, the deterministic embedder) goes through this so they agree.

struct Token {
    std::string text; // lowercased
    std::size_t begin = 0;
    std::size_t end = 0; // byte offsets into the source, half-open
};

std::vector<Token> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);
std::size_t count_tokens(std::string_view text);

// True for bytes that belong to a token. ASCII alphanumerics plus any
// byte >= 0x80, so multi-byte UTF-8 sequences stay intact.
bool is_word_byte(unsigned char c);

// 64-bit FNV-1a, used for content ids and the deterministic embedder.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
std::uint64_t splitmix64(std::uint64_t x);
std::string hex64(std::uint64_t value);

} // namespace maha
