#pragma once

#include "curv4/errors.hpp"
#include "curv4/numerics.hpp"
#include "curv4/parallel.hpp"
#include "curv4/tensor4.hpp"
#include "curv4/chart.hpp"
#include "curv4/frames.hpp"
#include "curv4/variety.hpp"
#include "curv4/example_metrics.hpp"
#include "curv4/registry.hpp"
#include "curv4/report.hpp"
