#pragma once

// Umbrella header.

#include "qpcocycle/error.hpp"
#include "qpcocycle/torus.hpp"
#include "qpcocycle/mat2.hpp"
#include "qpcocycle/trig_poly.hpp"
#include "qpcocycle/cocycle.hpp"
#include "qpcocycle/parallel.hpp"
#include "qpcocycle/quadrature.hpp"
#include "qpcocycle/lyapunov.hpp"
#include "qpcocycle/avalanche.hpp"
#include "qpcocycle/deviation.hpp"
#include "qpcocycle/multiscale.hpp"
#include "qpcocycle/io.hpp"
