#pragma once

#include "brmob/error.hpp"
#include "brmob/linalg.hpp"
#include "brmob/risk.hpp"
#include "brmob/rng.hpp"
#include "brmob/policy.hpp"
#include "brmob/posterior.hpp"
#include "brmob/bounds.hpp"
#include "brmob/cone_solver.hpp"
#include "brmob/programs.hpp"
#include "brmob/algorithms.hpp"
#include "brmob/evaluation.hpp"
#include "brmob/domains.hpp"
#include "brmob/experiment.hpp"
#include "brmob/report.hpp"
#include "brmob/diagnostics.hpp"
#include "brmob/io.hpp"
