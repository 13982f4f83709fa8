#pragma once

// Umbrella header for the quasi-static multi-legged locomotion library.

#include "multileg/bench.hpp"
#include "multileg/connection.hpp"
#include "multileg/coulomb.hpp"
#include "multileg/error.hpp"
#include "multileg/fitting.hpp"
#include "multileg/frame_solve.hpp"
#include "multileg/friction.hpp"
#include "multileg/gait.hpp"
#include "multileg/io.hpp"
#include "multileg/kinematics.hpp"
#include "multileg/math.hpp"
#include "multileg/model.hpp"
#include "multileg/support.hpp"
#include "multileg/trajectory.hpp"
