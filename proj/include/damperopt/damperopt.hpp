#pragma once

#include "damperopt/error.hpp"
#include "damperopt/lyapunov.hpp"
#include "damperopt/modal_models.hpp"
#include "damperopt/position_opt.hpp"
#include "damperopt/report.hpp"
#include "damperopt/summation.hpp"
#include "damperopt/trace_formula.hpp"
#include "damperopt/trig.hpp"
#include "damperopt/verification.hpp"
