#ifndef FRACTAL_DIMS_FRACTAL_DIMS_HPP
#define FRACTAL_DIMS_FRACTAL_DIMS_HPP

#include "errors.hpp"
#include "ifs.hpp"
#include "zeta.hpp"
#include "vonkoch.hpp"
#include "geometry.hpp"
#include "sampled.hpp"
#include "tube.hpp"
#include "mellin.hpp"
#include "explicit_formula.hpp"
#include "heat.hpp"
#include "io.hpp"

#endif  // FRACTAL_DIMS_FRACTAL_DIMS_HPP
