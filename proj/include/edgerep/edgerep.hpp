#pragma once

#include "edgerep/common.hpp"
#include "edgerep/exact_diag.hpp"
#include "edgerep/excess_spin.hpp"
#include "edgerep/fcs_core.hpp"
#include "edgerep/group_rep.hpp"
#include "edgerep/io.hpp"
#include "edgerep/lanczos.hpp"
#include "edgerep/linalg.hpp"
#include "edgerep/loop_mc.hpp"
#include "edgerep/spectral_flow.hpp"
