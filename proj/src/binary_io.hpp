#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace thunder::detail
{

class ByteWriter
{
public:
    void raw(const char *bytes, std::size_t n)
    {
        out_.insert(out_.end(), bytes, bytes + n);
    }
    void u8(std::uint8_t v)
    {
        out_.push_back(v);
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v)
    {
        u64(std::bit_cast<std::uint64_t>(v));
    }
    std::vector<std::uint8_t> take()
    {
        return std::move(out_);
    }

private:
    std::vector<std::uint8_t> out_;
};

/// Little-endian reader; every accessor returns false instead of reading past the end.
class ByteReader
{
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes)
    {
    }

    std::size_t remaining() const
    {
        return bytes_.size() - pos_;
    }
    bool raw(char *out, std::size_t n)
    {
        if (remaining() < n)
            return false;
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
        return true;
    }
    bool u8(std::uint8_t &v)
    {
        if (remaining() < 1)
            return false;
        v = bytes_[pos_++];
        return true;
    }
    bool u32(std::uint32_t &v)
    {
        if (remaining() < 4)
            return false;
        v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return true;
    }
    bool u64(std::uint64_t &v)
    {
        if (remaining() < 8)
            return false;
        v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return true;
    }
    bool f64(double &v)
    {
        std::uint64_t bits = 0;
        if (!u64(bits))
            return false;
        v = std::bit_cast<double>(bits);
        return true;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> readFileBytes(const std::string &path, bool &ok);
bool writeFileBytes(const std::string &path, std::span<const std::uint8_t> bytes);

}  // namespace thunder::detail
