#pragma once

#include "dffr/error.hpp"
#include "dffr/vector.hpp"
#include "dffr/network.hpp"
#include "dffr/geometry.hpp"
#include "dffr/objectives.hpp"
#include "dffr/trace.hpp"
#include "dffr/algorithms.hpp"
#include "dffr/metrics.hpp"
#include "dffr/bounds.hpp"
