#pragma once

#include "vedar/bench.hpp"
#include "vedar/core.hpp"
#include "vedar/detector.hpp"
#include "vedar/ingest.hpp"
#include "vedar/likelihood.hpp"
#include "vedar/memory.hpp"
#include "vedar/random.hpp"
#include "vedar/scaling.hpp"
#include "vedar/seasonality.hpp"
#include "vedar/smoothing.hpp"
#include "vedar/stats.hpp"
