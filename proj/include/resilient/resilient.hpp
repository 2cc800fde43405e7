#pragma once

// Finite-horizon resilient control under partial loss of control authority.

#include "resilient/errors.hpp"
#include "resilient/linalg.hpp"
#include "resilient/system.hpp"
#include "resilient/system_json.hpp"
#include "resilient/partition.hpp"
#include "resilient/feasibility.hpp"
#include "resilient/controller.hpp"
#include "resilient/simulator.hpp"
#include "resilient/io.hpp"
