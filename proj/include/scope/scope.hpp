#pragma once

#include "scope/error.hpp"
#include "scope/csv.hpp"
#include "scope/domain.hpp"
#include "scope/dist.hpp"
#include "scope/parallel.hpp"
#include "scope/excursion.hpp"
#include "scope/preimage.hpp"
#include "scope/quantile.hpp"
#include "scope/scheffe.hpp"
#include "scope/hypotests.hpp"
#include "scope/insig.hpp"
#include "scope/sim.hpp"
#include "scope/config.hpp"
