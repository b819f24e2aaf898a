// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/types.hpp"
#include "mixq/rng.hpp"
#include "mixq/geometry.hpp"
#include "mixq/signal.hpp"
#include "mixq/quant.hpp"
#include "mixq/hankel.hpp"
#include "mixq/linalg.hpp"
#include "mixq/completion.hpp"
#include "mixq/spectrum.hpp"
#include "mixq/theory.hpp"
#include "mixq/io.hpp"
#include "mixq/parallel.hpp"
#include "mixq/scenario.hpp"
#include "mixq/pipeline.hpp"
