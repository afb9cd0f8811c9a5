#pragma once

#include <string>
#include <string_view>

namespace maha {

std::string base64_encode(std::string_view bytes);

// Strict check: standard alphabet, '=' padding, length multiple of 4.
// The empty string decodes to zero bytes and counts as valid.
bool is_valid_base64(std::string_view s);

} // namespace maha
