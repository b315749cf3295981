#pragma once

#include "mimgan/analysis.hpp"
#include "mimgan/anomaly.hpp"
#include "mimgan/autodiff.hpp"
#include "mimgan/data.hpp"
#include "mimgan/matrix.hpp"
#include "mimgan/metrics.hpp"
#include "mimgan/mlp.hpp"
#include "mimgan/model_io.hpp"
#include "mimgan/objectives.hpp"
#include "mimgan/optimizer.hpp"
#include "mimgan/rng.hpp"
#include "mimgan/training.hpp"
