#pragma once

#include "spheredm/block_decomp.hpp"
#include "spheredm/dynamics.hpp"
#include "spheredm/geometry.hpp"
#include "spheredm/global_dm.hpp"
#include "spheredm/harmonics.hpp"
#include "spheredm/kernels.hpp"
#include "spheredm/linalg.hpp"
#include "spheredm/local_dm.hpp"
#include "spheredm/spectra.hpp"
#include "spheredm/types.hpp"
#include "spheredm/zonal.hpp"
