#pragma once

#include "sublin/errors.hpp"
#include "sublin/space.hpp"
#include "sublin/credal.hpp"
#include "sublin/axioms.hpp"
#include "sublin/dependence.hpp"
#include "sublin/product.hpp"
#include "sublin/independence.hpp"
#include "sublin/centering.hpp"
#include "sublin/enumeration.hpp"
#include "sublin/lln.hpp"
#include "sublin/strong.hpp"
#include "sublin/io.hpp"
#include "sublin/cli.hpp"
