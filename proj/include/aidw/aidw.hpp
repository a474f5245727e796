#pragma once

// Umbrella header for the interpolation engine.

#include "aidw/adaptive.hpp"
#include "aidw/executor.hpp"
#include "aidw/generate.hpp"
#include "aidw/grid.hpp"
#include "aidw/interpolate.hpp"
#include "aidw/io.hpp"
#include "aidw/knn.hpp"
#include "aidw/types.hpp"
