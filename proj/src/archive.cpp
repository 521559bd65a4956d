#include "dsl/archive.hpp"

#include <bit>
#include <cstring>

#include "dsl/error.hpp"

namespace dsl {

void ArchiveWriter::u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void ArchiveWriter::u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void ArchiveWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ArchiveWriter::str(std::string_view s) {
    u64(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void ArchiveWriter::f64s(std::span<const double> values) {
    u64(values.size());
    bytes_.reserve(bytes_.size() + values.size() * 8);
    for (double v : values) f64(v);
}

void ArchiveWriter::i32s(std::span<const std::int32_t> values) {
    u64(values.size());
    bytes_.reserve(bytes_.size() + values.size() * 4);
    for (std::int32_t v : values) i32(v);
}

// ---------------------------------------------------------------------------

void ArchiveReader::need(std::size_t count) const {
    if (count > remaining()) {
        throw ArchiveError("archive truncated at byte " + std::to_string(pos_) + " (needed " +
                           std::to_string(count) + " more bytes)");
    }
}

std::uint8_t ArchiveReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint32_t ArchiveReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(data_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return v;
}

std::uint64_t ArchiveReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(data_[pos_ + b]) << (8 * b);
    pos_ += 8;
    return v;
}

double ArchiveReader::f64() { return std::bit_cast<double>(u64()); }

std::size_t ArchiveReader::length(std::size_t element_size) {
    const std::uint64_t n = u64();
    if (element_size != 0 && n > remaining() / element_size) {
        throw ArchiveError("block length " + std::to_string(n) + " exceeds remaining archive size");
    }
    return static_cast<std::size_t>(n);
}

std::string ArchiveReader::str() {
    const std::size_t n = length(1);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::vector<double> ArchiveReader::f64s() {
    const std::size_t n = length(8);
    std::vector<double> out(n);
    for (auto& v : out) v = f64();
    return out;
}

std::vector<std::int32_t> ArchiveReader::i32s() {
    const std::size_t n = length(4);
    std::vector<std::int32_t> out(n);
    for (auto& v : out) v = i32();
    return out;
}

std::span<const std::uint8_t> ArchiveReader::raw(std::size_t count) {
    need(count);
    auto s = data_.subspan(pos_, count);
    pos_ += count;
    return s;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dsl
