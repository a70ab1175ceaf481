#pragma once

#include "quasiwave/config.hpp"
#include "quasiwave/diagnostics.hpp"
#include "quasiwave/errors.hpp"
#include "quasiwave/expr.hpp"
#include "quasiwave/flux_solver.hpp"
#include "quasiwave/grid.hpp"
#include "quasiwave/profiles.hpp"
#include "quasiwave/riemann_solver.hpp"
#include "quasiwave/runner.hpp"
#include "quasiwave/scenario.hpp"
#include "quasiwave/wavespeed.hpp"
