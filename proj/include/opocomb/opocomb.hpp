#pragma once

#include "coincidence_sim.hpp"
#include "correlation_model.hpp"
#include "error.hpp"
#include "etalon_filter.hpp"
#include "fitter.hpp"
#include "histogram.hpp"
#include "io.hpp"
#include "units.hpp"
