#pragma once

#include "qsdc/adversary.hpp"
#include "qsdc/channel.hpp"
#include "qsdc/error.hpp"
#include "qsdc/probe.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/rng.hpp"
#include "qsdc/statevector.hpp"
