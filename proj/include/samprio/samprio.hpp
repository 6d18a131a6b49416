#pragma once

#include "samprio/cluster.hpp"
#include "samprio/config.hpp"
#include "samprio/data_model.hpp"
#include "samprio/error.hpp"
#include "samprio/kmeans.hpp"
#include "samprio/linalg.hpp"
#include "samprio/metrics.hpp"
#include "samprio/outlier.hpp"
#include "samprio/pipeline.hpp"
#include "samprio/priority.hpp"
#include "samprio/reduce.hpp"
#include "samprio/seed.hpp"
#include "samprio/simharness.hpp"
