#pragma once

#include "fairflow/attack.hpp"
#include "fairflow/commands.hpp"
#include "fairflow/config.hpp"
#include "fairflow/csv.hpp"
#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"
#include "fairflow/fair_metric.hpp"
#include "fairflow/inference.hpp"
#include "fairflow/linalg.hpp"
#include "fairflow/models.hpp"
#include "fairflow/parallel.hpp"
#include "fairflow/serialize.hpp"
#include "fairflow/sim.hpp"
