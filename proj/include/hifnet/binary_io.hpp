#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hifnet::io {

/// Append-only little-endian encoder.
class ByteWriter {
public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_u32(std::uint32_t v);
    void put_u64(std::uint64_t v);
    void put_f64(double v);
    void put_bytes(std::span<const std::uint8_t> bytes);
    /// u32 length prefix followed by raw bytes.
    void put_string(std::string_view s);

    /// Appends the CRC-32 of everything written so far.
    void seal();

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian decoder. Reads past the end throw TruncatedError.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t get_u8();
    std::uint32_t get_u32();
    std::uint64_t get_u64();
    double get_f64();
    std::string get_string();

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> take(std::size_t n);

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Verifies the trailing CRC-32 written by ByteWriter::seal and returns the payload.
/// Throws TruncatedError when there is no room for a checksum, ChecksumError on mismatch.
std::span<const std::uint8_t> verify_sealed(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// CRC-32 of a whole file, as lowercase hex. Used by manifests.
std::string file_checksum(const std::filesystem::path& path);

} // namespace hifnet::io
