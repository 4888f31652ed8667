#ifndef SUDAP_SUDAP_HPP
#define SUDAP_SUDAP_HPP

#include "sudap/errors.hpp"
#include "sudap/model.hpp"
#include "sudap/parallel.hpp"
#include "sudap/subspace.hpp"
#include "sudap/projectors.hpp"
#include "sudap/dykstra.hpp"
#include "sudap/solver.hpp"
#include "sudap/metrics.hpp"
#include "sudap/simdata.hpp"
#include "sudap/io.hpp"

#endif  // SUDAP_SUDAP_HPP
