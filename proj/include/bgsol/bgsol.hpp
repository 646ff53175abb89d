#pragma once

// Umbrella include for the whole library.

#include "dynamics.hpp"
#include "errors.hpp"
#include "etienne.hpp"
#include "io.hpp"
#include "partition.hpp"
#include "rng.hpp"
#include "samplers.hpp"
#include "stationary.hpp"
