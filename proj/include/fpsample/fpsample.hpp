#pragma once

#include "fpsample/error.hpp"
#include "fpsample/random.hpp"
#include "fpsample/population.hpp"
#include "fpsample/distributions.hpp"
#include "fpsample/designs.hpp"
#include "fpsample/estimators.hpp"
#include "fpsample/instance.hpp"
#include "fpsample/monte_carlo.hpp"
#include "fpsample/enumerate.hpp"
#include "fpsample/verify.hpp"
