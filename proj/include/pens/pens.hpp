#pragma once

#include "pens/decay.hpp"
#include "pens/diagnostics.hpp"
#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/grid.hpp"
#include "pens/initial_data.hpp"
#include "pens/io.hpp"
#include "pens/mild_oracle.hpp"
#include "pens/solver.hpp"
#include "pens/spectral.hpp"
#include "pens/state.hpp"
