#pragma once

// Core library: intervals, group models, algebra maps, the reach engine,
// the case-study systems and the Monte Carlo oracle. Config and tube I/O
// live in lie_reach/io.hpp (needs nlohmann_json).

#include "lie_reach/algebra_maps.hpp"
#include "lie_reach/errors.hpp"
#include "lie_reach/interval.hpp"
#include "lie_reach/lie_group.hpp"
#include "lie_reach/reach.hpp"
#include "lie_reach/systems.hpp"
#include "lie_reach/validation.hpp"
