#pragma once

#include "netbf/types.hpp"
#include "netbf/rng.hpp"
#include "netbf/channel.hpp"
#include "netbf/beamsolver.hpp"
#include "netbf/dlsolver.hpp"
#include "netbf/feedback.hpp"
#include "netbf/montecarlo.hpp"
#include "netbf/experiment.hpp"
