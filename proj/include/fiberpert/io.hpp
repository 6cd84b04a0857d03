#pragma once

#include <cstdint>
#include <fstream>
#include <string>

namespace fiberpert {

// Little-endian binary stream helpers for the cache and dump formats.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path);
    void bytes(const void* p, std::size_t n);
    void u32(std::uint32_t v);
    void i32(std::int32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void close();

private:
    std::string path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path);
    void bytes(void* p, std::size_t n);
    void expect_magic(const char (&magic)[5]);
    std::uint32_t u32();
    std::int32_t i32();
    std::uint64_t u64();
    double f64();

private:
    std::string path_;
    std::ifstream in_;
};

} // namespace fiberpert
