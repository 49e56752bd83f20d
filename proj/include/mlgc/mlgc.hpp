#pragma once

#include "mlgc/core_model.hpp"
#include "mlgc/eval.hpp"
#include "mlgc/graph.hpp"
#include "mlgc/io.hpp"
#include "mlgc/matrix.hpp"
#include "mlgc/metric.hpp"
#include "mlgc/pairs.hpp"
#include "mlgc/refine.hpp"
#include "mlgc/spectral.hpp"
#include "mlgc/synthgen.hpp"
