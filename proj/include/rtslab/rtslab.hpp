#pragma once

#include "rtslab/unit_types.hpp"
#include "rtslab/game_state.hpp"
#include "rtslab/rules.hpp"
#include "rtslab/map_io.hpp"
#include "rtslab/scripts.hpp"
#include "rtslab/eval_static.hpp"
#include "rtslab/adaptive_weights.hpp"
#include "rtslab/clock.hpp"
#include "rtslab/search.hpp"
#include "rtslab/portfolio.hpp"
#include "rtslab/agent.hpp"
#include "rtslab/tournament.hpp"
#include "rtslab/bench.hpp"
#include "rtslab/config.hpp"
