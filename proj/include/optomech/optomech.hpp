#pragma once

#include "optomech/atomic_feedback.hpp"
#include "optomech/constants.hpp"
#include "optomech/cooling.hpp"
#include "optomech/dynamics.hpp"
#include "optomech/errors.hpp"
#include "optomech/params.hpp"
#include "optomech/polynomial.hpp"
#include "optomech/stability.hpp"
#include "optomech/steady_state.hpp"
#include "optomech/sweeps.hpp"
