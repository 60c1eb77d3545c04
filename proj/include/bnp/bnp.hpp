#pragma once

#include "bnp/calibrate.hpp"
#include "bnp/error.hpp"
#include "bnp/hedge.hpp"
#include "bnp/market_core.hpp"
#include "bnp/mmm.hpp"
#include "bnp/report.hpp"
#include "bnp/rng.hpp"
#include "bnp/selftest.hpp"
#include "bnp/simulate.hpp"
#include "bnp/special_fn.hpp"
