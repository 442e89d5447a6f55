// polariton.hpp - umbrella header
#pragma once

#include "polariton/constants.hpp"
#include "polariton/disorder.hpp"
#include "polariton/errors.hpp"
#include "polariton/fock.hpp"
#include "polariton/mdav2/absorption.hpp"
#include "polariton/mdav2/checkpoint.hpp"
#include "polariton/mdav2/eom.hpp"
#include "polariton/mdav2/propagate.hpp"
#include "polariton/mdav2/state.hpp"
#include "polariton/model.hpp"
#include "polariton/parallel.hpp"
#include "polariton/runner/config.hpp"
#include "polariton/runner/io.hpp"
#include "polariton/runner/run.hpp"
#include "polariton/sf_polariton.hpp"
#include "polariton/spectro.hpp"
#include "polariton/tc_exact.hpp"
#include "polariton/thermo_field.hpp"
