#pragma once

// Lossless compression for dense numerical sequences (integers and IEEE
// floats), built from a bijective latent transform, optional multiplier /
// quantization decomposition, adaptive delta coding, size-optimized
// histogram binning, and a tabled asymmetric numeral system coder.

#include "binning.hpp"
#include "bits.hpp"
#include "delta.hpp"
#include "delta_detect.hpp"
#include "entropy.hpp"
#include "error.hpp"
#include "format.hpp"
#include "mode_detect.hpp"
#include "modes.hpp"
#include "pipeline.hpp"
#include "theory.hpp"
#include "types.hpp"
