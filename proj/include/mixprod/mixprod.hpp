#ifndef MIXPROD_MIXPROD_HPP
#define MIXPROD_MIXPROD_HPP

// Identification of mixtures of product distributions over binary observables
// from multilinear moments, with condition certificates and adversarial
// instance generation. Umbrella header.

#include "mixprod/adversarial.hpp"
#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/hadamard.hpp"
#include "mixprod/identify.hpp"
#include "mixprod/io.hpp"
#include "mixprod/linalg.hpp"
#include "mixprod/model.hpp"
#include "mixprod/moments.hpp"
#include "mixprod/rng.hpp"
#include "mixprod/sampler.hpp"

#endif
