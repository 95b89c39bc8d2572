#ifndef HCTONE_IO_H_
#define HCTONE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hctone {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Writes to "<path>.partial" and renames, so readers never observe a
// half-written file.
void write_file_atomically(const std::filesystem::path& path,
                           std::span<const std::uint8_t> bytes);
void write_text_atomically(const std::filesystem::path& path, const std::string& text);

}  // namespace hctone

#endif  // HCTONE_IO_H_
