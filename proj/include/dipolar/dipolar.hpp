#pragma once

#include "dipolar/errors.hpp"
#include "dipolar/units.hpp"
#include "dipolar/channels.hpp"
#include "dipolar/born.hpp"
#include "dipolar/quadrature.hpp"
#include "dipolar/thermal.hpp"
#include "dipolar/ode.hpp"
#include "dipolar/cloud.hpp"
#include "dipolar/lsq.hpp"
#include "dipolar/timeseries.hpp"
#include "dipolar/estimators.hpp"
#include "dipolar/csv.hpp"
#include "dipolar/config.hpp"
