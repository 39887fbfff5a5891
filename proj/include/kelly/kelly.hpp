#pragma once

#include "kelly/assets.hpp"
#include "kelly/errors.hpp"
#include "kelly/growth.hpp"
#include "kelly/mechanics.hpp"
#include "kelly/optimize.hpp"
#include "kelly/parallel.hpp"
#include "kelly/random.hpp"
#include "kelly/sim.hpp"
#include "kelly/stats.hpp"
