#pragma once

// Umbrella header: horizontal-flow factorization, null/positive path
// synthesis, the positivity extension pipeline and Legendrian transport on
// standard contact R^3, with grid-certified verification throughout.

#include "csteer/builtins.hpp"
#include "csteer/contact.hpp"
#include "csteer/diffeo.hpp"
#include "csteer/errors.hpp"
#include "csteer/expr.hpp"
#include "csteer/extension.hpp"
#include "csteer/factorize.hpp"
#include "csteer/geometry.hpp"
#include "csteer/grid.hpp"
#include "csteer/integrate.hpp"
#include "csteer/legendrian.hpp"
#include "csteer/paths.hpp"
#include "csteer/ramp.hpp"
#include "csteer/scalar_field.hpp"
#include "csteer/synthesis.hpp"
#include "csteer/verify.hpp"
