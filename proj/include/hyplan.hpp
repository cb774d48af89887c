#pragma once

// Umbrella header for the hyplan library.

#include "hyplan/annealer.hpp"
#include "hyplan/budget.hpp"
#include "hyplan/config.hpp"
#include "hyplan/experiments.hpp"
#include "hyplan/instance.hpp"
#include "hyplan/metrics.hpp"
#include "hyplan/monolithic.hpp"
#include "hyplan/pool.hpp"
#include "hyplan/qubo.hpp"
#include "hyplan/reports.hpp"
#include "hyplan/rng.hpp"
#include "hyplan/scheduler.hpp"
#include "hyplan/svg.hpp"
