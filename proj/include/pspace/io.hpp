#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "pspace/errors.hpp"

namespace pspace {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are not supported");

inline constexpr std::uint64_t fnv_offset = 14695981039346656037ull;
inline constexpr std::uint64_t fnv_prime = 1099511628211ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = fnv_offset) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= fnv_prime;
    }
    return h;
}

/// Accumulates the same FNV-1a hash the binary writers produce; used to
/// derive content hashes of parameter sets without touching disk.
struct HashAccumulator {
    std::uint64_t h = fnv_offset;

    void raw(const void* data, std::size_t n) { h = fnv1a64(data, n, h); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }
    std::uint64_t value() const { return h; }
};

/// Binary file writer with a running checksum. Layout: 8-byte magic,
/// payload, 8-byte FNV-1a of the payload.
class BinaryWriter {
  public:
    BinaryWriter(const std::filesystem::path& path, const char magic[8]) : out_(path, std::ios::binary) {
        if (!out_) throw FormatError("cannot open for writing: " + path.string());
        out_.write(magic, 8);
    }

    void raw(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        hash_ = fnv1a64(data, n, hash_);
    }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void f64_span(std::span<const double> v) { raw(v.data(), v.size() * sizeof(double)); }

    void finish() {
        const std::uint64_t h = hash_;
        out_.write(reinterpret_cast<const char*>(&h), sizeof h);
        out_.close();
        if (!out_) throw FormatError("write failure while closing file");
    }

  private:
    std::ofstream out_;
    std::uint64_t hash_ = fnv_offset;
};

/// Reads a file written by BinaryWriter, verifying magic up front and the
/// checksum in finish(). Truncation surfaces as FormatError before any
/// partial object escapes.
class BinaryReader {
  public:
    BinaryReader(const std::filesystem::path& path, const char magic[8]) : in_(path, std::ios::binary) {
        if (!in_) throw FormatError("cannot open for reading: " + path.string());
        char m[8];
        in_.read(m, 8);
        if (!in_ || std::memcmp(m, magic, 8) != 0)
            throw FormatError("bad magic in " + path.string());
    }

    void raw(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (!in_ || in_.gcount() != static_cast<std::streamsize>(n))
            throw FormatError("unexpected end of file");
        hash_ = fnv1a64(data, n, hash_);
    }
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }
    void f64_span(std::span<double> v) { raw(v.data(), v.size() * sizeof(double)); }

    void finish() {
        const std::uint64_t expect = hash_;
        std::uint64_t stored = 0;
        in_.read(reinterpret_cast<char*>(&stored), sizeof stored);
        if (!in_ || in_.gcount() != sizeof stored) throw FormatError("missing checksum trailer");
        if (stored != expect) throw FormatError("checksum mismatch; file is corrupt");
    }

  private:
    std::ifstream in_;
    std::uint64_t hash_ = fnv_offset;
};

} // namespace pspace
