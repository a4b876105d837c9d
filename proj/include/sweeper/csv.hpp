#pragma once

#include <string>

namespace sweeper {

// Shortest decimal text that parses back to the same double; locale independent.
std::string format_double(double value);

}  // namespace sweeper
