#pragma once

#include "errors.hpp"
#include "series.hpp"
#include "ingest.hpp"
#include "estimators.hpp"
#include "simulator.hpp"
#include "report.hpp"
#include "selftest.hpp"
