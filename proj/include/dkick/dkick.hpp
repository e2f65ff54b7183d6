#pragma once

// Everything in one include.
#include <dkick/config.hpp>
#include <dkick/constants.hpp>
#include <dkick/ensemble.hpp>
#include <dkick/fields.hpp>
#include <dkick/protocols.hpp>
#include <dkick/quantum/selection.hpp>
#include <dkick/run.hpp>
#include <dkick/tof.hpp>
