#pragma once

#include "mtdma/allocation.hpp"
#include "mtdma/error.hpp"
#include "mtdma/experiment.hpp"
#include "mtdma/rtt_model.hpp"
#include "mtdma/schedule.hpp"
