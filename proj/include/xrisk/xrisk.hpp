#pragma once

#include "xrisk/binoculars.hpp"
#include "xrisk/core.hpp"
#include "xrisk/corpus.hpp"
#include "xrisk/dxo/dataset.hpp"
#include "xrisk/dxo/loss.hpp"
#include "xrisk/dxo/objective.hpp"
#include "xrisk/dxo/sampler.hpp"
#include "xrisk/dxo/scorer.hpp"
#include "xrisk/dxo/trainer.hpp"
#include "xrisk/errors.hpp"
#include "xrisk/metrics.hpp"
#include "xrisk/thresholds.hpp"
