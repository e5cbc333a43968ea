#pragma once

#include "dlra/core/common.hpp"
#include "dlra/core/orth.hpp"
#include "dlra/core/random.hpp"
#include "dlra/core/state.hpp"
#include "dlra/core/tangent.hpp"
#include "dlra/core/truncation.hpp"
#include "dlra/harness/config.hpp"
#include "dlra/harness/csv.hpp"
#include "dlra/harness/reference.hpp"
#include "dlra/harness/runners.hpp"
#include "dlra/harness/slope.hpp"
#include "dlra/harness/svg.hpp"
#include "dlra/integrators/evolve.hpp"
#include "dlra/integrators/step.hpp"
#include "dlra/ode/cost_model.hpp"
#include "dlra/ode/matrix_ode.hpp"
#include "dlra/ode/solvers.hpp"
#include "dlra/ode/sum_factor.hpp"
#include "dlra/problems/lattice.hpp"
#include "dlra/problems/schrodinger.hpp"
#include "dlra/problems/spherical_harmonics.hpp"
#include "dlra/problems/synthetic.hpp"
