#pragma once

#include "invlab/analyzer.hpp"
#include "invlab/coefficients.hpp"
#include "invlab/experiments.hpp"
#include "invlab/flow.hpp"
#include "invlab/functions.hpp"
#include "invlab/geometry.hpp"
#include "invlab/grid.hpp"
#include "invlab/jet.hpp"
#include "invlab/quasi_random.hpp"
#include "invlab/semigroup.hpp"
#include "invlab/sparse_solver.hpp"
#include "invlab/types.hpp"
