#ifndef HCTONE_HASH_H_
#define HCTONE_HASH_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace hctone {

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

}  // namespace hctone

#endif  // HCTONE_HASH_H_
