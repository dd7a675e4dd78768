#pragma once

#include "rank1/config.hpp"
#include "rank1/flat_policies.hpp"
#include "rank1/harness.hpp"
#include "rank1/instance.hpp"
#include "rank1/kl.hpp"
#include "rank1/policy_common.hpp"
#include "rank1/random.hpp"
#include "rank1/rank1_elim.hpp"
