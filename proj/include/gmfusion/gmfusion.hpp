#ifndef GMFUSION_GMFUSION_HPP
#define GMFUSION_GMFUSION_HPP

#include "gmfusion/error.hpp"
#include "gmfusion/model.hpp"
#include "gmfusion/random.hpp"
#include "gmfusion/trace.hpp"
#include "gmfusion/dd_io.hpp"
#include "gmfusion/greedy.hpp"
#include "gmfusion/lap.hpp"
#include "gmfusion/dual_bca.hpp"
#include "gmfusion/qpbo.hpp"
#include "gmfusion/fusion.hpp"
#include "gmfusion/solver.hpp"

#endif
