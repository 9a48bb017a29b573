#pragma once

// Umbrella header for the few-shot feature generator library.

#include "fewgen/activations.hpp"
#include "fewgen/adam.hpp"
#include "fewgen/batchnorm.hpp"
#include "fewgen/checkpoint.hpp"
#include "fewgen/dataset.hpp"
#include "fewgen/episodes.hpp"
#include "fewgen/errors.hpp"
#include "fewgen/format.hpp"
#include "fewgen/gradcheck.hpp"
#include "fewgen/inputs.hpp"
#include "fewgen/losses.hpp"
#include "fewgen/manifest.hpp"
#include "fewgen/matrix.hpp"
#include "fewgen/mlp.hpp"
#include "fewgen/models.hpp"
#include "fewgen/pca.hpp"
#include "fewgen/rng.hpp"
#include "fewgen/synthetic.hpp"
#include "fewgen/training.hpp"
#include "fewgen/vec.hpp"
