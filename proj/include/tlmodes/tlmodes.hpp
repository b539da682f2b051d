#pragma once

// Normal modes, Kerr nonlinearities and dressed spectra of a transmission-line
// resonator with an embedded lumped-element circuit.

#include "tlmodes/constants.hpp"
#include "tlmodes/effective.hpp"
#include "tlmodes/errors.hpp"
#include "tlmodes/fluxqubit.hpp"
#include "tlmodes/lumped.hpp"
#include "tlmodes/netlist.hpp"
#include "tlmodes/oracle.hpp"
#include "tlmodes/pipeline.hpp"
#include "tlmodes/quantize.hpp"
#include "tlmodes/resonator.hpp"
