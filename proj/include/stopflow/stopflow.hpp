#pragma once

// Best-choice stopping on powers of a directed path.

#include "stopflow/bounds.hpp"
#include "stopflow/error.hpp"
#include "stopflow/exact.hpp"
#include "stopflow/harness.hpp"
#include "stopflow/observer.hpp"
#include "stopflow/oracle.hpp"
#include "stopflow/path_power.hpp"
#include "stopflow/rng.hpp"
#include "stopflow/strategies.hpp"
