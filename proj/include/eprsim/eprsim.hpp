#pragma once

// Umbrella header.

#include "eprsim/afc.hpp"
#include "eprsim/channel.hpp"
#include "eprsim/config.hpp"
#include "eprsim/csv.hpp"
#include "eprsim/epr_pair.hpp"
#include "eprsim/errors.hpp"
#include "eprsim/format.hpp"
#include "eprsim/purify.hpp"
#include "eprsim/repeater.hpp"
#include "eprsim/report.hpp"
#include "eprsim/rng.hpp"
#include "eprsim/runner.hpp"
