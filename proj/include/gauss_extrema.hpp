#pragma once

#include "gauss_extrema/error.hpp"
#include "gauss_extrema/gaussian_measure.hpp"
#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/norms.hpp"
#include "gauss_extrema/packed.hpp"
#include "gauss_extrema/process_sim.hpp"
#include "gauss_extrema/rng.hpp"
#include "gauss_extrema/sequence_extremes.hpp"
#include "gauss_extrema/special.hpp"
#include "gauss_extrema/spectral.hpp"
#include "gauss_extrema/sphere.hpp"
#include "gauss_extrema/statistics.hpp"
