#pragma once

#include "grid.hpp"
#include "io.hpp"
#include "fft.hpp"
#include "spectral.hpp"
#include "regularizers.hpp"
#include "problem.hpp"
#include "metrics.hpp"
#include "solvers.hpp"
#include "config.hpp"
#include "problem_gen.hpp"
#include "bench.hpp"
