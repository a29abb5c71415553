#pragma once

// Umbrella header.
#include "attenua/cavity.hpp"
#include "attenua/config.hpp"
#include "attenua/damping.hpp"
#include "attenua/decay_analysis.hpp"
#include "attenua/domain_grid.hpp"
#include "attenua/errors.hpp"
#include "attenua/observables.hpp"
#include "attenua/parallel.hpp"
#include "attenua/ray_control.hpp"
#include "attenua/report.hpp"
#include "attenua/scenario.hpp"
#include "attenua/simulate.hpp"
#include "attenua/vec.hpp"
#include "attenua/wave_solver.hpp"
