#pragma once

#include "strongmax/errors.hpp"
#include "strongmax/parallel.hpp"
#include "strongmax/grid.hpp"
#include "strongmax/grid_io.hpp"
#include "strongmax/quadrature.hpp"
#include "strongmax/rng.hpp"
#include "strongmax/report.hpp"
#include "strongmax/young.hpp"
#include "strongmax/orlicz.hpp"
#include "strongmax/maximal.hpp"
#include "strongmax/weights.hpp"
#include "strongmax/covering.hpp"
#include "strongmax/corpus.hpp"
#include "strongmax/verify.hpp"
