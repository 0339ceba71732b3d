#pragma once

#include "fodest/anova.hpp"
#include "fodest/batch.hpp"
#include "fodest/common.hpp"
#include "fodest/config.hpp"
#include "fodest/direction.hpp"
#include "fodest/engine.hpp"
#include "fodest/estimators.hpp"
#include "fodest/experiment.hpp"
#include "fodest/gradients.hpp"
#include "fodest/icosphere.hpp"
#include "fodest/io.hpp"
#include "fodest/peaks.hpp"
#include "fodest/response.hpp"
#include "fodest/sh.hpp"
#include "fodest/signal.hpp"
#include "fodest/tensor.hpp"
#include "fodest/volume.hpp"

namespace fod {
inline constexpr const char* kVersion = "0.1.0";
}
