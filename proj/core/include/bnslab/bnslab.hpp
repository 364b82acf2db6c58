#pragma once

#include "bnslab/dynamics.hpp"
#include "bnslab/errors.hpp"
#include "bnslab/io.hpp"
#include "bnslab/linalg.hpp"
#include "bnslab/metrics.hpp"
#include "bnslab/mlp.hpp"
#include "bnslab/parallel.hpp"
#include "bnslab/rng.hpp"
#include "bnslab/samplers.hpp"
#include "bnslab/schedule.hpp"
#include "bnslab/score.hpp"
#include "bnslab/spectral.hpp"
#include "bnslab/theory.hpp"
#include "bnslab/toydata.hpp"
