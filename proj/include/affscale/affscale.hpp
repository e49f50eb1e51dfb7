#pragma once

#include "affscale/bank.hpp"
#include "affscale/chroma.hpp"
#include "affscale/covariance.hpp"
#include "affscale/derivatives.hpp"
#include "affscale/error.hpp"
#include "affscale/image.hpp"
#include "affscale/io.hpp"
#include "affscale/iterkernel.hpp"
#include "affscale/paths.hpp"
#include "affscale/pyramid.hpp"
#include "affscale/reference.hpp"
#include "affscale/semidiscrete.hpp"
#include "affscale/verify.hpp"
