#include "hifnet/binary_io.hpp"

#include "hifnet/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace hifnet::io {

namespace {

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

template <typename T>
T decode_le(std::span<const std::uint8_t> bytes) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<T>(bytes[i]) << (8 * i);
    }
    return v;
}

} // namespace

void ByteWriter::put_u32(std::uint32_t v) { append_le(buf_, v); }

void ByteWriter::put_u64(std::uint64_t v) { append_le(buf_, v); }

void ByteWriter::put_f64(double v) { append_le(buf_, std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_bytes(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::put_string(std::string_view s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteWriter::seal() { put_u32(crc32(buf_)); }

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
    if (n > remaining()) {
        throw TruncatedError("unexpected end of data at byte " + std::to_string(pos_) + " (need " +
                             std::to_string(n) + ", have " + std::to_string(remaining()) + ")");
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::get_u8() { return take(1)[0]; }

std::uint32_t ByteReader::get_u32() { return decode_le<std::uint32_t>(take(4)); }

std::uint64_t ByteReader::get_u64() { return decode_le<std::uint64_t>(take(8)); }

double ByteReader::get_f64() { return std::bit_cast<double>(decode_le<std::uint64_t>(take(8))); }

std::string ByteReader::get_string() {
    const auto n = get_u32();
    auto raw = take(n);
    return {raw.begin(), raw.end()};
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks to stay within range.
    constexpr std::size_t chunk = 1u << 30;
    for (std::size_t off = 0; off < bytes.size(); off += chunk) {
        const auto n = std::min(chunk, bytes.size() - off);
        crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    }
    return static_cast<std::uint32_t>(crc);
}

std::span<const std::uint8_t> verify_sealed(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) {
        throw TruncatedError("file too short to carry a checksum");
    }
    auto payload = bytes.first(bytes.size() - 4);
    const auto stored = decode_le<std::uint32_t>(bytes.last(4));
    const auto actual = crc32(payload);
    if (stored != actual) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "checksum mismatch (stored %08x, computed %08x)", stored, actual);
        throw ChecksumError(msg);
    }
    return payload;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string() + " for reading");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

std::string file_checksum(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", crc32(bytes));
    return hex;
}

} // namespace hifnet::io
