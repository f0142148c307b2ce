#pragma once

#include "hrl/bspline.hpp"
#include "hrl/emden_fowler.hpp"
#include "hrl/extremals.hpp"
#include "hrl/parallel.hpp"
#include "hrl/params.hpp"
#include "hrl/profile.hpp"
#include "hrl/quadrature.hpp"
#include "hrl/spectrum.hpp"
#include "hrl/stability.hpp"
