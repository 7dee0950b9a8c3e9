#pragma once

#include "gaitforge/errors.hpp"
#include "gaitforge/joints.hpp"
#include "gaitforge/gait_kernel.hpp"
#include "gaitforge/action_decoder.hpp"
#include "gaitforge/regulators.hpp"
#include "gaitforge/policy_net.hpp"
#include "gaitforge/reward.hpp"
#include "gaitforge/plant.hpp"
#include "gaitforge/surrogate.hpp"
#include "gaitforge/biped_env.hpp"
#include "gaitforge/rollout.hpp"
#include "gaitforge/baseline.hpp"
#include "gaitforge/es_trainer.hpp"
#include "gaitforge/checkpoint.hpp"
#include "gaitforge/config.hpp"
#include "gaitforge/training.hpp"
#include "gaitforge/trace.hpp"
#include "gaitforge/wire.hpp"
#include "gaitforge/bridge_plant.hpp"
