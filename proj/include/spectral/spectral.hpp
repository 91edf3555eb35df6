#pragma once

#include "spectral/config.hpp"
#include "spectral/frame.hpp"
#include "spectral/functional.hpp"
#include "spectral/grid.hpp"
#include "spectral/operator.hpp"
#include "spectral/oracle.hpp"
#include "spectral/poisson.hpp"
#include "spectral/potential.hpp"
#include "spectral/runner.hpp"
#include "spectral/solvers.hpp"
#include "spectral/weights.hpp"
