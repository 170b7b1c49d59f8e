#pragma once

#include "penh/errors.hpp"
#include "penh/stats_core.hpp"
#include "penh/random.hpp"
#include "penh/models.hpp"
#include "penh/mc.hpp"
#include "penh/hypothesis_tests.hpp"
#include "penh/test_spec.hpp"
#include "penh/simulate.hpp"
#include "penh/mixture.hpp"
#include "penh/regime.hpp"
#include "penh/diagnostics.hpp"
#include "penh/demo.hpp"
#include "penh/serialize.hpp"
