// Umbrella header.
#pragma once

#include "fsde/check.hpp"
#include "fsde/coeff.hpp"
#include "fsde/constraint.hpp"
#include "fsde/expr.hpp"
#include "fsde/fbm.hpp"
#include "fsde/frac.hpp"
#include "fsde/grid.hpp"
#include "fsde/json_io.hpp"
#include "fsde/mc.hpp"
#include "fsde/parallel.hpp"
#include "fsde/rng.hpp"
#include "fsde/sde.hpp"
#include "fsde/transform.hpp"
