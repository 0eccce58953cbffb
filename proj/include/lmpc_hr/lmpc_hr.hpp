#pragma once

#include "lmpc_hr/condense.hpp"
#include "lmpc_hr/error.hpp"
#include "lmpc_hr/model.hpp"
#include "lmpc_hr/optim/lp.hpp"
#include "lmpc_hr/optim/oracle.hpp"
#include "lmpc_hr/optim/qp.hpp"
#include "lmpc_hr/samplers/benchmark.hpp"
#include "lmpc_hr/samplers/chain.hpp"
#include "lmpc_hr/samplers/rng.hpp"
#include "lmpc_hr/samplers/samplers.hpp"
#include "lmpc_hr/validate/validate.hpp"
