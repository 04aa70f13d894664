#pragma once

// Umbrella header for the strictly batch imitation learning toolkit.

#include "edm/cartpole.hpp"
#include "edm/config.hpp"
#include "edm/data.hpp"
#include "edm/eval.hpp"
#include "edm/mdp.hpp"
#include "edm/mlp.hpp"
#include "edm/params.hpp"
#include "edm/policy.hpp"
#include "edm/rng.hpp"
#include "edm/rollout.hpp"
#include "edm/sgld.hpp"
#include "edm/solver.hpp"
#include "edm/tape.hpp"
#include "edm/tensor.hpp"
#include "edm/textio.hpp"
#include "edm/train.hpp"
