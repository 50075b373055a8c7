#pragma once

// Umbrella header.

#include "nuidx/cohort.hpp"
#include "nuidx/config.hpp"
#include "nuidx/copula.hpp"
#include "nuidx/csv.hpp"
#include "nuidx/curve.hpp"
#include "nuidx/cv.hpp"
#include "nuidx/datagen.hpp"
#include "nuidx/error.hpp"
#include "nuidx/index.hpp"
#include "nuidx/lasso.hpp"
#include "nuidx/matrix.hpp"
#include "nuidx/metrics.hpp"
#include "nuidx/parallel.hpp"
#include "nuidx/pipeline.hpp"
#include "nuidx/rng.hpp"
#include "nuidx/scenario.hpp"
#include "nuidx/study.hpp"
#include "nuidx/theory.hpp"
#include "nuidx/weights.hpp"
