#pragma once

#include "spdpower/errors.hpp"
#include "spdpower/field_io.hpp"
#include "spdpower/likelihood.hpp"
#include "spdpower/matrix.hpp"
#include "spdpower/metrics.hpp"
#include "spdpower/parallel.hpp"
#include "spdpower/rng.hpp"
#include "spdpower/simulation.hpp"
#include "spdpower/spectral.hpp"
#include "spdpower/tensor_literal.hpp"
#include "spdpower/tensor_stats.hpp"
#include "spdpower/textio.hpp"
