// Umbrella header.
#pragma once

#include "simulmt/alignment.hpp"
#include "simulmt/augment.hpp"
#include "simulmt/io.hpp"
#include "simulmt/metrics.hpp"
#include "simulmt/monotonic.hpp"
#include "simulmt/pipeline.hpp"
#include "simulmt/sftformat.hpp"
#include "simulmt/simulator.hpp"
#include "simulmt/trajectory.hpp"
