#pragma once

// Convenience umbrella for the whole library.

#include "brlogit/dataset.hpp"
#include "brlogit/io.hpp"
#include "brlogit/math.hpp"
#include "brlogit/model.hpp"
#include "brlogit/penalties.hpp"
#include "brlogit/rng.hpp"
#include "brlogit/simplex.hpp"
#include "brlogit/simulation.hpp"
#include "brlogit/solvers.hpp"
