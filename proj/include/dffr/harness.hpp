#pragma once

#include "dffr/harness/config.hpp"
#include "dffr/harness/trace_io.hpp"
#include "dffr/harness/experiment.hpp"
