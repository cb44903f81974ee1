#pragma once

#include "toa/detail/numeric.hpp"
#include "toa/dispersion.hpp"
#include "toa/errors.hpp"
#include "toa/orthogonality.hpp"
#include "toa/pep.hpp"
#include "toa/tep.hpp"
#include "toa/tunneling.hpp"
#include "toa/version.hpp"
