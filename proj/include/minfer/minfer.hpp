#pragma once

// Minimal inference for incomplete 2x2 tables.

#include "assure.hpp"
#include "corroborate.hpp"
#include "corroboration_test.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "identify.hpp"
#include "likelihood.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sampling.hpp"
