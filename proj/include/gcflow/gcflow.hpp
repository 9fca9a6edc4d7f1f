#pragma once

#include "gcflow/config.hpp"
#include "gcflow/errors.hpp"
#include "gcflow/flow_operator.hpp"
#include "gcflow/graph_geometry.hpp"
#include "gcflow/report.hpp"
#include "gcflow/small_tensor.hpp"
#include "gcflow/sphere_grid.hpp"
#include "gcflow/time_integrator.hpp"
#include "gcflow/verification.hpp"
