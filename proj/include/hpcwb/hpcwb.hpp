#pragma once

#include "hpcwb/bench.hpp"
#include "hpcwb/kernels.hpp"
#include "hpcwb/machine.hpp"
#include "hpcwb/partest/plan.hpp"
#include "hpcwb/partest/report.hpp"
#include "hpcwb/partest/runner.hpp"
#include "hpcwb/plot.hpp"
#include "hpcwb/results.hpp"
#include "hpcwb/roofline.hpp"
#include "hpcwb/simgroup.hpp"
