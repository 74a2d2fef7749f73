#pragma once

#include "analysis.hpp"
#include "analytic.hpp"
#include "commands.hpp"
#include "io.hpp"
#include "model.hpp"
#include "propagator.hpp"
#include "scenario.hpp"
#include "schedule.hpp"
#include "schema.hpp"
#include "svg.hpp"
#include "units.hpp"
