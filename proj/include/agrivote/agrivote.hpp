#pragma once

// Umbrella header for the agrivote toolkit.

#include "agrivote/ablation.hpp"
#include "agrivote/bench.hpp"
#include "agrivote/dataset.hpp"
#include "agrivote/ensemble.hpp"
#include "agrivote/errors.hpp"
#include "agrivote/figures.hpp"
#include "agrivote/fixture.hpp"
#include "agrivote/image.hpp"
#include "agrivote/labels.hpp"
#include "agrivote/metrics.hpp"
#include "agrivote/models.hpp"
#include "agrivote/pipeline.hpp"
#include "agrivote/preprocess.hpp"
#include "agrivote/probability.hpp"
#include "agrivote/split.hpp"
#include "agrivote/trainer.hpp"
#include "agrivote/util.hpp"
