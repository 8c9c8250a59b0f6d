#pragma once

// Umbrella header.

#include "vem/linalg.hpp"
#include "vem/poly.hpp"
#include "vem/quadrature.hpp"
#include "vem/geom.hpp"
#include "vem/integrate.hpp"
#include "vem/dofs.hpp"
#include "vem/spaces2d.hpp"
#include "vem/spaces3d.hpp"
#include "vem/parallel.hpp"
#include "vem/complex.hpp"
