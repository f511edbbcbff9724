// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "paircorr/numeric.hpp"
#include "paircorr/parallel.hpp"
#include "paircorr/rng.hpp"
#include "paircorr/kernels.hpp"
#include "paircorr/expsums.hpp"
#include "paircorr/stats.hpp"
#include "paircorr/measure.hpp"
#include "paircorr/diophantine.hpp"
