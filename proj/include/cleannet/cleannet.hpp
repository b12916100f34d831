#pragma once

/// cleannet.hpp -- umbrella header for the CleanNet label-noise library:
/// a minimal reverse-mode tensor core, dataset and checkpoint I/O, K-means
/// reference selection, the attention-based joint embedding model, noise
/// detection with baselines, weighted classifier training, and a synthetic
/// benchmark harness.

#include "cleannet/autodiff.hpp"
#include "cleannet/checkpoint.hpp"
#include "cleannet/classifier.hpp"
#include "cleannet/dataset.hpp"
#include "cleannet/detect.hpp"
#include "cleannet/error.hpp"
#include "cleannet/io.hpp"
#include "cleannet/kmeans.hpp"
#include "cleannet/model.hpp"
#include "cleannet/rng.hpp"
#include "cleannet/synthetic.hpp"
#include "cleannet/tensor.hpp"
