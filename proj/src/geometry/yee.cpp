#include "phc/yee.hpp"

#include <stdexcept>
#include <string>

namespace phc
{
std::string_view component_name(Component c)
{
    static constexpr std::array<std::string_view, 6> names = {"Ex", "Ey", "Ez", "Hx", "Hy", "Hz"};
    return names[static_cast<int>(c)];
}

Component parse_component(std::string_view name)
{
    for (Component c : kAllComponents)
    {
        if (component_name(c) == name)
        {
            return c;
        }
    }
    throw std::invalid_argument("unknown field component '" + std::string(name) + "'");
}

} // namespace phc
