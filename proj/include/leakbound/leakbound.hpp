#pragma once

#include "attack.hpp"
#include "bounds.hpp"
#include "field.hpp"
#include "leakage.hpp"
#include "likelihood.hpp"
#include "mi_estimation.hpp"
#include "numerics.hpp"
#include "oracle.hpp"
#include "qgrid.hpp"
#include "rng.hpp"
#include "sbox.hpp"
