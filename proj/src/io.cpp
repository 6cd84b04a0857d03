#include "fiberpert/io.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace fiberpert {

namespace {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

} // namespace

BinaryWriter::BinaryWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
}

void BinaryWriter::bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw std::runtime_error("write failed: " + path_);
}

void BinaryWriter::u32(std::uint32_t v) { v = to_little(v); bytes(&v, sizeof v); }
void BinaryWriter::i32(std::int32_t v) { v = to_little(v); bytes(&v, sizeof v); }
void BinaryWriter::u64(std::uint64_t v) { v = to_little(v); bytes(&v, sizeof v); }

void BinaryWriter::f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    u64(u);
}

void BinaryWriter::close() {
    out_.close();
    if (!out_) throw std::runtime_error("close failed: " + path_);
}

BinaryReader::BinaryReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open " + path);
}

void BinaryReader::bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error(path_ + ": truncated file");
}

void BinaryReader::expect_magic(const char (&magic)[5]) {
    char m[4];
    bytes(m, 4);
    if (std::memcmp(m, magic, 4) != 0) throw std::runtime_error(path_ + ": bad magic, expected " + magic);
}

std::uint32_t BinaryReader::u32() { std::uint32_t v; bytes(&v, sizeof v); return to_little(v); }
std::int32_t BinaryReader::i32() { std::int32_t v; bytes(&v, sizeof v); return to_little(v); }
std::uint64_t BinaryReader::u64() { std::uint64_t v; bytes(&v, sizeof v); return to_little(v); }

double BinaryReader::f64() {
    const std::uint64_t u = u64();
    double v;
    std::memcpy(&v, &u, sizeof v);
    return v;
}

} // namespace fiberpert
