#pragma once

#include "mmcast/error.hpp"
#include "mmcast/rational.hpp"
#include "mmcast/field.hpp"
#include "mmcast/network.hpp"
#include "mmcast/entropy.hpp"
#include "mmcast/subproblem.hpp"
#include "mmcast/submodular.hpp"
#include "mmcast/lp.hpp"
#include "mmcast/region.hpp"
#include "mmcast/feasibility.hpp"
#include "mmcast/rate_single.hpp"
#include "mmcast/rate_multi.hpp"
#include "mmcast/netcode.hpp"
#include "mmcast/io.hpp"
