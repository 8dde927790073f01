#pragma once

#include "fo/config.hpp"
#include "fo/equilibrium.hpp"
#include "fo/error.hpp"
#include "fo/experiments.hpp"
#include "fo/forecast_panel.hpp"
#include "fo/gbrt.hpp"
#include "fo/harness.hpp"
#include "fo/json_util.hpp"
#include "fo/overreact.hpp"
#include "fo/panel.hpp"
#include "fo/parallel.hpp"
#include "fo/regress.hpp"
#include "fo/rng.hpp"
#include "fo/stats.hpp"
#include "fo/synth.hpp"
