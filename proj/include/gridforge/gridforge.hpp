#pragma once

#include "gridforge/error.hpp"
#include "gridforge/tensor.hpp"
#include "gridforge/flux.hpp"
#include "gridforge/ode.hpp"
#include "gridforge/parallel.hpp"
#include "gridforge/grid.hpp"
#include "gridforge/interp.hpp"
#include "gridforge/ortho_grid.hpp"
#include "gridforge/elliptic_solve.hpp"
#include "gridforge/final_grid.hpp"
#include "gridforge/quality.hpp"
#include "gridforge/io.hpp"
#include "gridforge/run.hpp"
#include "gridforge/svg.hpp"
