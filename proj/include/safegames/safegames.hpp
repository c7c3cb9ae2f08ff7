#pragma once

#include "safegames/aiger.hpp"
#include "safegames/bdd.hpp"
#include "safegames/benchgen.hpp"
#include "safegames/builder.hpp"
#include "safegames/decomp.hpp"
#include "safegames/game.hpp"
#include "safegames/harness.hpp"
#include "safegames/random_games.hpp"
#include "safegames/solvers.hpp"
