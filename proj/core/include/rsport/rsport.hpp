#pragma once

#include "rsport/error.hpp"
#include "rsport/hjb_ode.hpp"
#include "rsport/hybridsim.hpp"
#include "rsport/market.hpp"
#include "rsport/policy.hpp"
#include "rsport/rng.hpp"
