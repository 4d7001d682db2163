#pragma once

// Umbrella header.
#include "pclag/types.hpp"
#include "pclag/linalg.hpp"
#include "pclag/objective.hpp"
#include "pclag/problem.hpp"
#include "pclag/schedules.hpp"
#include "pclag/subproblems.hpp"
#include "pclag/certify.hpp"
#include "pclag/method.hpp"
#include "pclag/solver_p1.hpp"
#include "pclag/solver_p2.hpp"
#include "pclag/solver_p3.hpp"
#include "pclag/metrics.hpp"
#include "pclag/generators.hpp"
#include "pclag/experiment.hpp"
