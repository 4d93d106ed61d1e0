#pragma once

#include "gsir/errors.hpp"
#include "gsir/random.hpp"
#include "gsir/operator_algebra.hpp"
#include "gsir/kernel.hpp"
#include "gsir/gsir.hpp"
#include "gsir/spectral_sim.hpp"
#include "gsir/rates.hpp"
#include "gsir/datagen.hpp"
#include "gsir/metrics.hpp"
#include "gsir/harness/config.hpp"
#include "gsir/harness/io.hpp"
#include "gsir/harness/experiments.hpp"
