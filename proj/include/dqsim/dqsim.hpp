#pragma once

#include "dqsim/algorithms.hpp"
#include "dqsim/circuit.hpp"
#include "dqsim/density_matrix.hpp"
#include "dqsim/dqc.hpp"
#include "dqsim/dynamic.hpp"
#include "dqsim/engine.hpp"
#include "dqsim/experiments.hpp"
#include "dqsim/error.hpp"
#include "dqsim/histogram.hpp"
#include "dqsim/io.hpp"
#include "dqsim/kernels.hpp"
#include "dqsim/link.hpp"
#include "dqsim/matrix.hpp"
#include "dqsim/noise.hpp"
#include "dqsim/rng.hpp"
#include "dqsim/simulator.hpp"
#include "dqsim/statevector.hpp"
#include "dqsim/synthesis.hpp"
