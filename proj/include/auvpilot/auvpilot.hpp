#pragma once

#include "auvpilot/actuators.hpp"
#include "auvpilot/config.hpp"
#include "auvpilot/controller.hpp"
#include "auvpilot/csv.hpp"
#include "auvpilot/dynamics.hpp"
#include "auvpilot/guidance.hpp"
#include "auvpilot/identification.hpp"
#include "auvpilot/kinematics.hpp"
#include "auvpilot/optimize.hpp"
#include "auvpilot/regression.hpp"
#include "auvpilot/simulator.hpp"
#include "auvpilot/tuning.hpp"
#include "auvpilot/types.hpp"
