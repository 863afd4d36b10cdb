#pragma once

#include "kdvlab/banded.hpp"
#include "kdvlab/exact.hpp"
#include "kdvlab/grid.hpp"
#include "kdvlab/interp.hpp"
#include "kdvlab/lab/commands.hpp"
#include "kdvlab/lab/report.hpp"
#include "kdvlab/lab/run_config.hpp"
#include "kdvlab/rhs.hpp"
#include "kdvlab/stepper.hpp"
