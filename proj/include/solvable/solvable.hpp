#pragma once

// Everything: special functions, quadrature, ODE solver, catalog, engines, checks, recipes.

#include "solvable/errors.hpp"
#include "solvable/special_functions.hpp"
#include "solvable/quadrature.hpp"
#include "solvable/tabulated.hpp"
#include "solvable/potential.hpp"
#include "solvable/ode.hpp"
#include "solvable/catalog.hpp"
#include "solvable/residual.hpp"
#include "solvable/transform.hpp"
#include "solvable/verify.hpp"
#include "solvable/io.hpp"
