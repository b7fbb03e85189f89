#include "phc/cli.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace phc
{
namespace
{
static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T> void put(std::ostream &out, T v)
{
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
    {
        std::reverse(b, b + sizeof(T));
    }
    out.write(reinterpret_cast<const char *>(b), sizeof(T));
}

template <typename T> T take(std::istream &in, const std::string &path)
{
    unsigned char b[sizeof(T)];
    if (!in.read(reinterpret_cast<char *>(b), sizeof(T)))
    {
        throw std::runtime_error(path + ": truncated PHCF file");
    }
    if constexpr (std::endian::native == std::endian::big)
    {
        std::reverse(b, b + sizeof(T));
    }
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

} // namespace

void write_phcf(const std::string &path, const FieldFile &field)
{
    const std::size_t n = static_cast<std::size_t>(field.nx) * field.ny * field.nz;
    for (const auto &c : field.components)
    {
        if (c.size() != n)
        {
            throw std::invalid_argument("PHCF component size does not match its dimensions");
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out.write("PHCF", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, field.nx);
    put<std::uint32_t>(out, field.ny);
    put<std::uint32_t>(out, field.nz);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(field.components.size()));
    put<double>(out, field.dx_nm);
    for (const auto &c : field.components)
    {
        if constexpr (std::endian::native == std::endian::little)
        {
            out.write(reinterpret_cast<const char *>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(double)));
        }
        else
        {
            for (double v : c)
            {
                put<double>(out, v);
            }
        }
    }
    if (!out)
    {
        throw std::runtime_error("failed writing " + path);
    }
}

FieldFile read_phcf(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("cannot open " + path);
    }
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "PHCF", 4) != 0)
    {
        throw std::runtime_error(path + ": not a PHCF file");
    }
    const auto version = take<std::uint32_t>(in, path);
    if (version != 1)
    {
        throw std::runtime_error(path + ": unsupported PHCF version " + std::to_string(version));
    }
    FieldFile f;
    f.nx = take<std::uint32_t>(in, path);
    f.ny = take<std::uint32_t>(in, path);
    f.nz = take<std::uint32_t>(in, path);
    const auto count = take<std::uint32_t>(in, path);
    f.dx_nm = take<double>(in, path);
    const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny * f.nz;
    f.components.resize(count);
    for (auto &c : f.components)
    {
        c.resize(n);
        for (auto &v : c)
        {
            v = take<double>(in, path);
        }
    }
    if (in.peek() != std::char_traits<char>::eof())
    {
        throw std::runtime_error(path + ": trailing bytes after PHCF payload");
    }
    return f;
}

FieldFile permittivity_file(const PermittivityGrid &grid)
{
    FieldFile f;
    f.nx = static_cast<std::uint32_t>(grid.dims.nx);
    f.ny = static_cast<std::uint32_t>(grid.dims.ny);
    f.nz = static_cast<std::uint32_t>(grid.dims.nz);
    f.dx_nm = grid.dx_nm;
    for (const auto &c : grid.eps)
    {
        f.components.push_back(c);
    }
    return f;
}

} // namespace phc
