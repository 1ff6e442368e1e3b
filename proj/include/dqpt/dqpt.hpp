#ifndef DQPT_DQPT_HPP
#define DQPT_DQPT_HPP

#include "dqpt/analysis.hpp"
#include "dqpt/commands.hpp"
#include "dqpt/dynamics.hpp"
#include "dqpt/errors.hpp"
#include "dqpt/io.hpp"
#include "dqpt/model.hpp"
#include "dqpt/observables.hpp"
#include "dqpt/spin_core.hpp"

#endif  // DQPT_DQPT_HPP
