// Umbrella header for the whole library.
#pragma once

#include "cbc/cover_reductions.hpp"
#include "cbc/coverage.hpp"
#include "cbc/dst.hpp"
#include "cbc/dst_bidirected.hpp"
#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"
#include "cbc/io.hpp"
#include "cbc/oracles.hpp"
#include "cbc/relaxation.hpp"
#include "cbc/simplex.hpp"
