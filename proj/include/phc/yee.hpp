#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace phc
{
enum class Component
{
    Ex = 0,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz
};

inline constexpr std::array<Component, 6> kAllComponents = {Component::Ex, Component::Ey, Component::Ez,
                                                            Component::Hx, Component::Hy, Component::Hz};

inline constexpr bool is_electric(Component c) { return static_cast<int>(c) < 3; }

// Cartesian axis the component points along (0=x, 1=y, 2=z).
inline constexpr int component_axis(Component c) { return static_cast<int>(c) % 3; }

// Yee staggering in units of one cell: Ex sits at (i+1/2, j, k), Hx at (i, j+1/2, k+1/2), etc.
inline constexpr std::array<double, 3> yee_offset(Component c)
{
    const int axis = component_axis(c);
    std::array<double, 3> off{0.0, 0.0, 0.0};
    for (int d = 0; d < 3; ++d)
    {
        const bool along = d == axis;
        off[d] = (is_electric(c) == along) ? 0.5 : 0.0;
    }
    return off;
}

// True when the component sample lies on integer (node) planes along `axis`.
inline constexpr bool on_node_plane(Component c, int axis) { return yee_offset(c)[axis] == 0.0; }

std::string_view component_name(Component c);
Component parse_component(std::string_view name);

struct GridDims
{
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t size() const
    {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    // Row-major with z fastest: (ix * ny + iy) * nz + iz.
    std::size_t index(int i, int j, int k) const
    {
        return (static_cast<std::size_t>(i) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(nz) +
               static_cast<std::size_t>(k);
    }
    int extent(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
    bool operator==(const GridDims &) const = default;
};

} // namespace phc
