#pragma once

#include "boxspline.hpp"
#include "compare.hpp"
#include "density_quad.hpp"
#include "errors.hpp"
#include "hciz.hpp"
#include "lie_data.hpp"
#include "multiplicity.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sampler.hpp"
#include "semiclassical.hpp"
#include "spline_core.hpp"
