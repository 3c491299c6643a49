#ifndef SPHDESIGN_SPHDESIGN_HPP
#define SPHDESIGN_SPHDESIGN_HPP

#include "criteria.hpp"
#include "design.hpp"
#include "design_io.hpp"
#include "errors.hpp"
#include "harmonics.hpp"
#include "orthopoly.hpp"
#include "quadrature.hpp"
#include "special.hpp"
#include "symmetry.hpp"
#include "viz_export.hpp"

#endif
