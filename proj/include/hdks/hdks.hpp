#pragma once

#include "hdks/errors.hpp"
#include "hdks/linalg.hpp"
#include "hdks/chart.hpp"
#include "hdks/ks_profile.hpp"
#include "hdks/models.hpp"
#include "hdks/geometry.hpp"
#include "hdks/charts.hpp"
#include "hdks/rk.hpp"
#include "hdks/geodesics.hpp"
#include "hdks/quadrature.hpp"
#include "hdks/embeddings.hpp"
#include "hdks/topology.hpp"
#include "hdks/parallel.hpp"
