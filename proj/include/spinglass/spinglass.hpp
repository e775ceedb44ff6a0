#pragma once

#include "spinglass/bench.hpp"
#include "spinglass/coupling.hpp"
#include "spinglass/diagnostics.hpp"
#include "spinglass/errors.hpp"
#include "spinglass/estimator.hpp"
#include "spinglass/graph.hpp"
#include "spinglass/model.hpp"
#include "spinglass/parallel.hpp"
#include "spinglass/rng.hpp"
#include "spinglass/sampler.hpp"
#include "spinglass/types.hpp"
#include "spinglass/version.hpp"
