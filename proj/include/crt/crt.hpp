#pragma once

// Everything in one include.

#include "crt/vec.hpp"
#include "crt/errors.hpp"
#include "crt/parallel.hpp"
#include "crt/field.hpp"
#include "crt/phantom.hpp"
#include "crt/lattice.hpp"
#include "crt/io.hpp"
#include "crt/quadrature.hpp"
#include "crt/transforms.hpp"
#include "crt/support.hpp"
#include "crt/verification.hpp"
#include "crt/discrete.hpp"
#include "crt/recon.hpp"
