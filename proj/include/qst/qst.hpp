#pragma once

#include "qst/chain.hpp"
#include "qst/fidelity.hpp"
#include "qst/oracle.hpp"
#include "qst/propagator.hpp"
#include "qst/tridiagonal_eigen.hpp"
