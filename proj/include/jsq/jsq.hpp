#pragma once

#include "jsq/asymmetric.hpp"
#include "jsq/blocking.hpp"
#include "jsq/cohen_chain.hpp"
#include "jsq/convkernel.hpp"
#include "jsq/error.hpp"
#include "jsq/finite_dist.hpp"
#include "jsq/infinite_dist.hpp"
#include "jsq/io.hpp"
#include "jsq/model.hpp"
#include "jsq/oracle.hpp"
#include "jsq/scalar.hpp"
#include "jsq/simulator.hpp"
#include "jsq/totals_bounds.hpp"
