#pragma once

#include "bernoulli.hpp"
#include "calculus.hpp"
#include "elliptic.hpp"
#include "fock.hpp"
#include "grid.hpp"
#include "heisenberg.hpp"
#include "modular.hpp"
#include "oracle.hpp"
#include "report.hpp"
#include "sewing.hpp"
#include "suite.hpp"
#include "types.hpp"
#include "zhu.hpp"
