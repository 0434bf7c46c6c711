#pragma once

#include "deconv/adaptive.hpp"
#include "deconv/densities.hpp"
#include "deconv/error_models.hpp"
#include "deconv/estimators.hpp"
#include "deconv/kernels.hpp"
#include "deconv/lowerbound.hpp"
#include "deconv/quadrature.hpp"
#include "deconv/rng.hpp"
#include "deconv/simulate.hpp"
#include "deconv/tuning.hpp"
