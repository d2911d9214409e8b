#pragma once

#include "subhmm/core.hpp"
#include "subhmm/estimator.hpp"
#include "subhmm/experiments.hpp"
#include "subhmm/fixtures.hpp"
#include "subhmm/hmm.hpp"
#include "subhmm/io.hpp"
#include "subhmm/linalg.hpp"
#include "subhmm/moments.hpp"
#include "subhmm/predictor.hpp"
