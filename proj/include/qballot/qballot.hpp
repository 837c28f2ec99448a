#pragma once

#include "qballot/attacks.hpp"
#include "qballot/ballot_states.hpp"
#include "qballot/dcnet.hpp"
#include "qballot/density.hpp"
#include "qballot/errors.hpp"
#include "qballot/io.hpp"
#include "qballot/layout.hpp"
#include "qballot/measurement.hpp"
#include "qballot/protocols.hpp"
#include "qballot/rng.hpp"
#include "qballot/scenario.hpp"
#include "qballot/state.hpp"
#include "qballot/stats.hpp"
