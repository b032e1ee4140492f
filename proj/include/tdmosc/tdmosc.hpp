#pragma once

#include "tdmosc/classical.hpp"
#include "tdmosc/csv.hpp"
#include "tdmosc/errors.hpp"
#include "tdmosc/expansion.hpp"
#include "tdmosc/grid.hpp"
#include "tdmosc/mass_model.hpp"
#include "tdmosc/ode.hpp"
#include "tdmosc/packet.hpp"
#include "tdmosc/pde.hpp"
#include "tdmosc/quadrature.hpp"
#include "tdmosc/riccati.hpp"
