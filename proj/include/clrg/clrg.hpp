#pragma once

#include "clrg/bench.hpp"
#include "clrg/dynamics.hpp"
#include "clrg/errors.hpp"
#include "clrg/game.hpp"
#include "clrg/io.hpp"
#include "clrg/numerics.hpp"
#include "clrg/population.hpp"
#include "clrg/rng.hpp"
#include "clrg/sem.hpp"
#include "clrg/svg.hpp"
