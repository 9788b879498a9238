// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hexbp/alloc_stats.hpp"
#include "hexbp/basis.hpp"
#include "hexbp/bench.hpp"
#include "hexbp/cost_model.hpp"
#include "hexbp/dense.hpp"
#include "hexbp/geometry.hpp"
#include "hexbp/mesh.hpp"
#include "hexbp/operator.hpp"
#include "hexbp/quadrature.hpp"
#include "hexbp/restriction.hpp"
#include "hexbp/solver.hpp"
#include "hexbp/tensor.hpp"
#include "hexbp/verify.hpp"
