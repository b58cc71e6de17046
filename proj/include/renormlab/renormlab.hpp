#ifndef RENORMLAB_RENORMLAB_HPP
#define RENORMLAB_RENORMLAB_HPP

// Everything except the command-line front end.
#include "error.hpp"
#include "families.hpp"
#include "geometry.hpp"
#include "loperator.hpp"
#include "maps.hpp"
#include "renorm.hpp"
#include "solver.hpp"
#include "version.hpp"

#endif  // RENORMLAB_RENORMLAB_HPP
