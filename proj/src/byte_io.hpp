#pragma once

// Little-endian encode/decode helpers shared by the wire codec and the
// network snapshot.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace dpsnn::detail {

template <typename T>
void put_le(std::vector<std::uint8_t> &out, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t,
                    std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    const auto bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i)
    {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset)
{
    static_assert(std::is_trivially_copyable_v<T>);
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t,
                    std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
    {
        bits |= static_cast<U>(U{in[offset + i]} << (8 * i));
    }
    return std::bit_cast<T>(bits);
}

/// Bounds-checked sequential reader.
class ByteReader
{
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T read()
    {
        if (remaining() < sizeof(T))
        {
            throw std::out_of_range("read past end of buffer");
        }
        T value = get_le<T>(bytes_, pos_);
        pos_ += sizeof(T);
        return value;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::size_t position() const { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace dpsnn::detail
