// Umbrella header: the whole coherent-state quantization engine.
#pragma once

#include "metriq/chart.hpp"
#include "metriq/coherent.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"
#include "metriq/fock.hpp"
#include "metriq/geometry.hpp"
#include "metriq/io.hpp"
#include "metriq/observable.hpp"
#include "metriq/poly.hpp"
#include "metriq/propagator.hpp"
#include "metriq/rng.hpp"
#include "metriq/semiclassical.hpp"
#include "metriq/spin.hpp"
#include "metriq/toeplitz.hpp"
#include "metriq/wiener.hpp"
