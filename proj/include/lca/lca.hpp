#pragma once

#include "lca/activation.hpp"
#include "lca/baseline.hpp"
#include "lca/diagnostics.hpp"
#include "lca/dynamics.hpp"
#include "lca/experiments.hpp"
#include "lca/io.hpp"
#include "lca/model.hpp"
#include "lca/objective.hpp"
#include "lca/random.hpp"
#include "lca/types.hpp"
#include "lca/validate.hpp"
#include "lca/version.hpp"
