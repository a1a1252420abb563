#pragma once

// Umbrella header.

#include "cfkit/cf.hpp"
#include "cfkit/checkpoint.hpp"
#include "cfkit/eval.hpp"
#include "cfkit/hpsearch.hpp"
#include "cfkit/image.hpp"
#include "cfkit/net.hpp"
#include "cfkit/oracle.hpp"
#include "cfkit/sequence.hpp"
#include "cfkit/spectral.hpp"
#include "cfkit/synth.hpp"
#include "cfkit/tracker.hpp"
